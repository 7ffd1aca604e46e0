//! Weisfeiler-Lehman relabeling in three flavors: unsigned, signed with
//! neutral sign tokens, and the balance-aware dual-label variant.
//!
//! Composite strings use explicit separators so distinct structures never
//! collide: the root label is separated by `,`, neighbor tokens are
//! joined with `.`, and for the dual variant the two neighbor blocks are
//! joined with `|`. Dictionary keys additionally carry the variant and
//! iteration index, so labels of different iterations are distinct
//! tokens.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::graph::{Sign, SignedGraph};

/// Injective map from composite strings to compact integer labels.
///
/// Plain interning issues ids in first-seen order starting at the base
/// (default 1). Numeric interning (used for degree-based initial labels)
/// maps a value to itself whenever that id is still free, which keeps
/// initial labels readable as degrees.
#[derive(Debug, Clone, Default)]
pub struct LabelDictionary {
    map: HashMap<String, u64>,
    used: HashSet<u64>,
    next_id: u64,
}

impl LabelDictionary {
    pub fn new() -> LabelDictionary {
        LabelDictionary::with_base(1)
    }

    pub fn with_base(base: u64) -> LabelDictionary {
        LabelDictionary {
            map: HashMap::new(),
            used: HashSet::new(),
            next_id: base,
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<u64> {
        self.map.get(key).copied()
    }

    /// All (key, label) pairs, sorted by label.
    pub fn entries(&self) -> Vec<(String, u64)> {
        let mut v: Vec<(String, u64)> = self.map.iter().map(|(k, l)| (k.clone(), *l)).collect();
        v.sort_by_key(|(_, l)| *l);
        v
    }

    fn alloc(&mut self) -> u64 {
        while self.used.contains(&self.next_id) {
            self.next_id += 1;
        }
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    /// First-seen interning.
    pub fn intern(&mut self, key: &str) -> u64 {
        if let Some(&id) = self.map.get(key) {
            return id;
        }
        let id = self.alloc();
        self.map.insert(key.to_string(), id);
        self.used.insert(id);
        id
    }

    /// Interns a numeric key, preferring the value itself as its label.
    pub fn intern_numeric(&mut self, value: u64) -> u64 {
        let key = format!("#{value}");
        if let Some(&id) = self.map.get(&key) {
            return id;
        }
        let id = if self.used.contains(&value) {
            self.alloc()
        } else {
            value
        };
        self.map.insert(key, id);
        self.used.insert(id);
        id
    }

    /// Interns a batch of keys in sorted order. Used by the collection
    /// pipeline so that id assignment depends only on the key set of a
    /// relabeling round, not on graph or vertex order.
    pub fn intern_sorted(&mut self, keys: &BTreeSet<String>) {
        for key in keys {
            if !self.map.contains_key(key) {
                let id = self.alloc();
                self.map.insert(key.clone(), id);
                self.used.insert(id);
            }
        }
    }
}

/// Relabeling flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WlVariant {
    Unsigned,
    Sg2vn,
    Sg2vsb,
}

impl WlVariant {
    pub fn name(self) -> &'static str {
        match self {
            WlVariant::Unsigned => "g2v",
            WlVariant::Sg2vn => "sg2vn",
            WlVariant::Sg2vsb => "sg2vsb",
        }
    }
}

// Dictionary key prefixes; the iteration index is baked into every key.
fn key_unsigned(t: usize, composite: &str) -> String {
    format!("u{t}:{composite}")
}
fn key_sg2vn(t: usize, composite: &str) -> String {
    format!("n{t}:{composite}")
}
// Positive and negative composites share one key space within an
// iteration: the update rules apply the same injective function to
// structurally identical tuples.
fn key_sg2vsb(t: usize, composite: &str) -> String {
    format!("s{t}:{composite}")
}
fn key_fused(t: usize, pos: u64, neg: u64) -> String {
    format!("f{t}:({pos},{neg})")
}

fn join_labels(mut labels: Vec<u64>) -> String {
    labels.sort_unstable();
    labels
        .iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(".")
}

/// Composite of the unsigned rule: previous label, then the sorted
/// multiset of neighbor labels.
pub fn unsigned_composite(g: &SignedGraph, labels: &[u64], u: usize) -> String {
    let neighbors: Vec<u64> = g.adjacency(u).iter().map(|&(v, _)| labels[v]).collect();
    format!("{},{}", labels[u], join_labels(neighbors))
}

/// Composite of the sign-annotated rule: each neighbor token carries the
/// sign of the connecting edge. Tokens sort by (label, sign) with `+`
/// before `-` at equal label.
pub fn sg2vn_composite(g: &SignedGraph, labels: &[u64], u: usize) -> String {
    let mut tokens: Vec<(u64, u8)> = g
        .adjacency(u)
        .iter()
        .map(|&(v, s)| (labels[v], if s == Sign::Positive { 0u8 } else { 1u8 }))
        .collect();
    tokens.sort_unstable();
    let joined = tokens
        .iter()
        .map(|&(l, neg)| format!("{}{}", if neg == 0 { '+' } else { '-' }, l))
        .collect::<Vec<_>>()
        .join(".");
    format!("{},{}", labels[u], joined)
}

/// Dual composites of the balance-aware rule. The positive composite
/// combines the vertex's positive label with the positive labels of
/// positive neighbors and the negative labels of negative neighbors; the
/// negative composite mirrors it.
pub fn sg2vsb_composites(
    g: &SignedGraph,
    pos_labels: &[u64],
    neg_labels: &[u64],
    u: usize,
) -> (String, String) {
    let mut pp = Vec::new(); // positive labels of positive neighbors
    let mut nm = Vec::new(); // negative labels of negative neighbors
    let mut mp = Vec::new(); // negative labels of positive neighbors
    let mut pm = Vec::new(); // positive labels of negative neighbors
    for &(v, s) in g.adjacency(u) {
        match s {
            Sign::Positive => {
                pp.push(pos_labels[v]);
                mp.push(neg_labels[v]);
            }
            Sign::Negative => {
                nm.push(neg_labels[v]);
                pm.push(pos_labels[v]);
            }
        }
    }
    let pos = format!(
        "{},{}|{}",
        pos_labels[u],
        join_labels(pp),
        join_labels(nm)
    );
    let neg = format!(
        "{},{}|{}",
        neg_labels[u],
        join_labels(mp),
        join_labels(pm)
    );
    (pos, neg)
}

/// Initial labels of the unsigned rule: the compressed unsigned degree.
pub fn wl_init_unsigned(g: &SignedGraph, dict: &mut LabelDictionary) -> Vec<u64> {
    (0..g.order())
        .map(|u| dict.intern_numeric(g.degree(u) as u64))
        .collect()
}

/// One unsigned relabeling round (first-seen interning; `t >= 1`).
pub fn wl_iterate_unsigned(
    g: &SignedGraph,
    labels: &[u64],
    dict: &mut LabelDictionary,
    t: usize,
) -> Vec<u64> {
    (0..g.order())
        .map(|u| dict.intern(&key_unsigned(t, &unsigned_composite(g, labels, u))))
        .collect()
}

/// Initial labels of the sign-annotated rule: the compressed
/// (negative degree; positive degree) pair.
pub fn sg2vn_init(g: &SignedGraph, dict: &mut LabelDictionary) -> Vec<u64> {
    (0..g.order())
        .map(|u| {
            dict.intern(&format!(
                "n0:({};{})",
                g.negative_degree(u),
                g.positive_degree(u)
            ))
        })
        .collect()
}

/// One sign-annotated relabeling round.
pub fn sg2vn_iterate(
    g: &SignedGraph,
    labels: &[u64],
    dict: &mut LabelDictionary,
    t: usize,
) -> Vec<u64> {
    (0..g.order())
        .map(|u| dict.intern(&key_sg2vn(t, &sg2vn_composite(g, labels, u))))
        .collect()
}

/// Initial dual labels: compressed positive and negative degrees sharing
/// one dictionary.
pub fn sg2vsb_init(g: &SignedGraph, dict: &mut LabelDictionary) -> (Vec<u64>, Vec<u64>) {
    let pos = (0..g.order())
        .map(|u| dict.intern_numeric(g.positive_degree(u) as u64))
        .collect();
    let neg = (0..g.order())
        .map(|u| dict.intern_numeric(g.negative_degree(u) as u64))
        .collect();
    (pos, neg)
}

/// One dual relabeling round.
pub fn sg2vsb_iterate(
    g: &SignedGraph,
    pos_labels: &[u64],
    neg_labels: &[u64],
    dict: &mut LabelDictionary,
    t: usize,
) -> (Vec<u64>, Vec<u64>) {
    let composites: Vec<(String, String)> = (0..g.order())
        .map(|u| sg2vsb_composites(g, pos_labels, neg_labels, u))
        .collect();
    let pos = composites
        .iter()
        .map(|(p, _)| dict.intern(&key_sg2vsb(t, p)))
        .collect();
    let neg = composites
        .iter()
        .map(|(_, n)| dict.intern(&key_sg2vsb(t, n)))
        .collect();
    (pos, neg)
}

/// Fuses the dual labels of one iteration into single per-vertex labels.
pub fn sg2vsb_finalize(
    pos_labels: &[u64],
    neg_labels: &[u64],
    dict: &mut LabelDictionary,
    t: usize,
) -> Vec<u64> {
    pos_labels
        .iter()
        .zip(neg_labels)
        .map(|(&p, &n)| dict.intern(&key_fused(t, p, n)))
        .collect()
}

/// Labels of every iteration for one graph, plus display composites for
/// the debug dump. For the dual variant, `labels` holds the fused labels
/// and `duals` the underlying pairs.
#[derive(Debug, Clone)]
pub struct LabelTrace {
    pub labels: Vec<Vec<u64>>,
    pub duals: Option<Vec<(Vec<u64>, Vec<u64>)>>,
    /// Per iteration, per vertex: `(composite, compact label)` lines for
    /// the dump. The dual variant has two lines per vertex.
    pub dump_lines: Vec<Vec<(usize, String, u64)>>,
}

impl LabelTrace {
    pub fn iterations(&self) -> usize {
        self.labels.len() - 1
    }

    /// Debug dump: per iteration, lines `vertex<TAB>composite<TAB>label`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (t, lines) in self.dump_lines.iter().enumerate() {
            out.push_str(&format!("# iteration {t}\n"));
            for (u, composite, label) in lines {
                out.push_str(&format!("{u}\t{composite}\t{label}\n"));
            }
        }
        out
    }
}

/// Runs `iterations` relabeling rounds over a whole collection with a
/// shared dictionary.
///
/// When `canonical` is set, each round interns its composites in sorted
/// order, so the id assignment depends only on the set of composites of
/// the round: label multisets become invariant under vertex relabeling
/// and collection reordering. When unset, ids are issued in first-seen
/// order, which reproduces hand-worked traces on a single graph.
pub fn relabel_collection(
    graphs: &[SignedGraph],
    variant: WlVariant,
    iterations: usize,
    dict: &mut LabelDictionary,
    canonical: bool,
) -> Vec<LabelTrace> {
    match variant {
        WlVariant::Unsigned => relabel_single(
            graphs,
            iterations,
            dict,
            canonical,
            |g, d| wl_init_unsigned(g, d),
            |g, labels, u| unsigned_composite(g, labels, u),
            key_unsigned,
            |g, u, _d| format!("{}", g.degree(u)),
        ),
        WlVariant::Sg2vn => relabel_single(
            graphs,
            iterations,
            dict,
            canonical,
            |g, d| sg2vn_init(g, d),
            |g, labels, u| sg2vn_composite(g, labels, u),
            key_sg2vn,
            |g, u, _d| format!("({};{})", g.negative_degree(u), g.positive_degree(u)),
        ),
        WlVariant::Sg2vsb => relabel_dual(graphs, iterations, dict, canonical),
    }
}

#[allow(clippy::too_many_arguments)]
fn relabel_single(
    graphs: &[SignedGraph],
    iterations: usize,
    dict: &mut LabelDictionary,
    canonical: bool,
    init: impl Fn(&SignedGraph, &mut LabelDictionary) -> Vec<u64>,
    composite: impl Fn(&SignedGraph, &[u64], usize) -> String,
    key: impl Fn(usize, &str) -> String,
    init_display: impl Fn(&SignedGraph, usize, &LabelDictionary) -> String,
) -> Vec<LabelTrace> {
    // Init round. Degree-based numeric interning is order-independent by
    // construction. The pair-based init (sg2vn) keys on strings, so its
    // canonical form pre-interns the key set in sorted order; probing the
    // init on a scratch dictionary tells which case we are in.
    if canonical {
        let mut scratch = LabelDictionary::new();
        if let Some(g) = graphs.first() {
            let _ = init(g, &mut scratch);
        }
        if scratch.entries().iter().any(|(k, _)| k.starts_with("n0:")) {
            let keys: BTreeSet<String> = graphs
                .iter()
                .flat_map(|g| {
                    (0..g.order()).map(|u| {
                        format!("n0:({};{})", g.negative_degree(u), g.positive_degree(u))
                    })
                })
                .collect();
            dict.intern_sorted(&keys);
        }
    }
    let mut current: Vec<Vec<u64>> = graphs.iter().map(|g| init(g, dict)).collect();

    let mut traces: Vec<LabelTrace> = graphs
        .iter()
        .zip(&current)
        .map(|(g, labels)| LabelTrace {
            labels: vec![labels.clone()],
            duals: None,
            dump_lines: vec![(0..g.order())
                .map(|u| (u, init_display(g, u, dict), labels[u]))
                .collect()],
        })
        .collect();

    for t in 1..=iterations {
        let composites: Vec<Vec<String>> = graphs
            .iter()
            .zip(&current)
            .map(|(g, labels)| {
                (0..g.order())
                    .map(|u| composite(g, labels, u))
                    .collect()
            })
            .collect();
        if canonical {
            let keys: BTreeSet<String> = composites
                .iter()
                .flatten()
                .map(|c| key(t, c))
                .collect();
            dict.intern_sorted(&keys);
        }
        for (gi, per_graph) in composites.iter().enumerate() {
            let labels: Vec<u64> = per_graph.iter().map(|c| dict.intern(&key(t, c))).collect();
            traces[gi].dump_lines.push(
                per_graph
                    .iter()
                    .enumerate()
                    .map(|(u, c)| (u, c.clone(), labels[u]))
                    .collect(),
            );
            traces[gi].labels.push(labels.clone());
            current[gi] = labels;
        }
    }
    traces
}

fn relabel_dual(
    graphs: &[SignedGraph],
    iterations: usize,
    dict: &mut LabelDictionary,
    canonical: bool,
) -> Vec<LabelTrace> {
    let mut duals: Vec<(Vec<u64>, Vec<u64>)> =
        graphs.iter().map(|g| sg2vsb_init(g, dict)).collect();
    let mut traces: Vec<LabelTrace> = Vec::with_capacity(graphs.len());

    // Fused labels at iteration 0.
    let fused0: Vec<Vec<u64>> = if canonical {
        let keys: BTreeSet<String> = duals
            .iter()
            .flat_map(|(p, n)| p.iter().zip(n).map(|(&a, &b)| key_fused(0, a, b)))
            .collect();
        dict.intern_sorted(&keys);
        duals
            .iter()
            .map(|(p, n)| sg2vsb_finalize(p, n, dict, 0))
            .collect()
    } else {
        duals
            .iter()
            .map(|(p, n)| sg2vsb_finalize(p, n, dict, 0))
            .collect()
    };

    for (gi, g) in graphs.iter().enumerate() {
        let (p, n) = &duals[gi];
        traces.push(LabelTrace {
            labels: vec![fused0[gi].clone()],
            duals: Some(vec![(p.clone(), n.clone())]),
            dump_lines: vec![(0..g.order())
                .flat_map(|u| {
                    vec![
                        (u, format!("+deg {}", g.positive_degree(u)), p[u]),
                        (u, format!("-deg {}", g.negative_degree(u)), n[u]),
                    ]
                })
                .collect()],
        });
    }

    for t in 1..=iterations {
        let composites: Vec<Vec<(String, String)>> = graphs
            .iter()
            .zip(&duals)
            .map(|(g, (p, n))| {
                (0..g.order())
                    .map(|u| sg2vsb_composites(g, p, n, u))
                    .collect()
            })
            .collect();
        if canonical {
            let keys: BTreeSet<String> = composites
                .iter()
                .flatten()
                .flat_map(|(p, n)| [key_sg2vsb(t, p), key_sg2vsb(t, n)])
                .collect();
            dict.intern_sorted(&keys);
        }
        let mut new_duals = Vec::with_capacity(graphs.len());
        for (gi, per_graph) in composites.iter().enumerate() {
            let pos: Vec<u64> = per_graph
                .iter()
                .map(|(p, _)| dict.intern(&key_sg2vsb(t, p)))
                .collect();
            let neg: Vec<u64> = per_graph
                .iter()
                .map(|(_, n)| dict.intern(&key_sg2vsb(t, n)))
                .collect();
            traces[gi].dump_lines.push(
                per_graph
                    .iter()
                    .enumerate()
                    .flat_map(|(u, (cp, cn))| {
                        vec![(u, cp.clone(), pos[u]), (u, cn.clone(), neg[u])]
                    })
                    .collect(),
            );
            new_duals.push((pos, neg));
        }
        duals = new_duals;
        // Fused labels for this iteration.
        if canonical {
            let keys: BTreeSet<String> = duals
                .iter()
                .flat_map(|(p, n)| p.iter().zip(n).map(|(&a, &b)| key_fused(t, a, b)))
                .collect();
            dict.intern_sorted(&keys);
        }
        for (gi, (p, n)) in duals.iter().enumerate() {
            let fused = sg2vsb_finalize(p, n, dict, t);
            traces[gi].labels.push(fused);
            traces[gi].duals.as_mut().unwrap().push((p.clone(), n.clone()));
        }
    }
    traces
}
