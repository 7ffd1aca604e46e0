//! Collection persistence and synthesis: signed edge-list files with a
//! CSV manifest, per-collection statistics, and a planted-partition
//! generator used in place of external benchmark data.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::balance::{solve_partition, BalanceMode, Partition};
use crate::error::{Result, SgError};
use crate::graph::{Sign, SignedGraph};
use crate::seeds::derive_seed;

/// A labeled set of signed graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphCollection {
    pub name: String,
    pub ids: Vec<String>,
    pub graphs: Vec<SignedGraph>,
    /// Dense class ids aligned with `class_names`.
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
    /// Ground-truth partitions, present for generated collections.
    pub planted: Option<Vec<Partition>>,
}

impl GraphCollection {
    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }
}

/// Parses one edge file: lines `u v s` with `s ∈ {+1, -1}`, `#`
/// comments, and an optional `n <count>` line declaring the order (for
/// edgeless graphs and isolated trailing vertices). Without a
/// declaration, vertex ids are remapped densely in ascending order.
pub fn parse_edge_file(content: &str, origin: &str) -> Result<SignedGraph> {
    let mut declared_order: Option<usize> = None;
    let mut raw_edges: Vec<(usize, usize, Sign)> = Vec::new();
    for (lineno, line) in content.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            ["n", count] => {
                let count = count.parse::<usize>().map_err(|_| {
                    SgError::Data(format!("{origin}:{lineno}: bad vertex count {count:?}"))
                })?;
                declared_order = Some(count);
            }
            [u, v, s] => {
                let u = u.parse::<usize>().map_err(|_| {
                    SgError::Data(format!("{origin}:{lineno}: bad vertex id {u:?}"))
                })?;
                let v = v.parse::<usize>().map_err(|_| {
                    SgError::Data(format!("{origin}:{lineno}: bad vertex id {v:?}"))
                })?;
                let sign = match *s {
                    "+1" | "1" => Sign::Positive,
                    "-1" => Sign::Negative,
                    other => {
                        return Err(SgError::Data(format!(
                            "{origin}:{lineno}: unknown sign token {other:?}"
                        )))
                    }
                };
                if u == v {
                    return Err(SgError::Data(format!(
                        "{origin}:{lineno}: self-loop on vertex {u}"
                    )));
                }
                raw_edges.push((u, v, sign));
            }
            _ => {
                return Err(SgError::Data(format!(
                    "{origin}:{lineno}: expected 'u v s' or 'n count', got {line:?}"
                )));
            }
        }
    }
    let (order, edges) = match declared_order {
        Some(n) => {
            for &(u, v, _) in &raw_edges {
                if u >= n || v >= n {
                    return Err(SgError::Data(format!(
                        "{origin}: edge ({u},{v}) exceeds declared order {n}"
                    )));
                }
            }
            (n, raw_edges)
        }
        None => {
            let mut ids: Vec<usize> = raw_edges
                .iter()
                .flat_map(|&(u, v, _)| [u, v])
                .collect();
            ids.sort_unstable();
            ids.dedup();
            let dense: HashMap<usize, usize> =
                ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
            let edges = raw_edges
                .into_iter()
                .map(|(u, v, s)| (dense[&u], dense[&v], s))
                .collect();
            (ids.len(), edges)
        }
    };
    SignedGraph::new(order, edges)
        .map_err(|e| SgError::Data(format!("{origin}: {e}")))
}

fn render_edge_file(g: &SignedGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "n {}", g.order());
    for &(u, v, s) in g.edges() {
        let token = if s == Sign::Positive { "+1" } else { "-1" };
        let _ = writeln!(out, "{u} {v} {token}");
    }
    out
}

/// Writes the collection into `dir`: one `<id>.edges` file per graph and
/// a `manifest.csv` with header `graph_id,path,label`. Canonical output:
/// edges sorted, graphs in id order.
pub fn save_collection(dir: &Path, collection: &GraphCollection) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let manifest_path = dir.join("manifest.csv");
    let mut manifest = std::fs::File::create(&manifest_path)?;
    writeln!(manifest, "graph_id,path,label")?;
    for ((id, g), &label) in collection.ids.iter().zip(&collection.graphs).zip(&collection.labels) {
        let file = format!("{id}.edges");
        std::fs::write(dir.join(&file), render_edge_file(g))?;
        writeln!(manifest, "{},{},{}", id, file, collection.class_names[label])?;
    }
    Ok(manifest_path)
}

/// Loads a collection from its manifest. Paths are resolved relative to
/// the manifest's directory; class names map to dense ids in sorted
/// order.
pub fn load_collection(manifest_path: &Path) -> Result<GraphCollection> {
    let content = std::fs::read_to_string(manifest_path)
        .map_err(|e| SgError::Data(format!("{}: {e}", manifest_path.display())))?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let mut lines = content.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "graph_id,path,label" => {}
        _ => {
            return Err(SgError::Data(format!(
                "{}: manifest must start with header 'graph_id,path,label'",
                manifest_path.display()
            )))
        }
    }
    let mut entries: Vec<(String, PathBuf, String)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (lineno, line) in lines {
        let lineno = lineno + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(SgError::Data(format!(
                "{}:{lineno}: expected 3 comma-separated fields",
                manifest_path.display()
            )));
        }
        let id = fields[0].trim().to_string();
        if !seen.insert(id.clone()) {
            return Err(SgError::Data(format!(
                "{}:{lineno}: duplicate graph id {id:?}",
                manifest_path.display()
            )));
        }
        entries.push((id, dir.join(fields[1].trim()), fields[2].trim().to_string()));
    }

    let mut class_names: Vec<String> = entries.iter().map(|(_, _, l)| l.clone()).collect();
    class_names.sort();
    class_names.dedup();
    let class_index: HashMap<&str, usize> = class_names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();

    let graphs: Vec<Result<SignedGraph>> = entries
        .par_iter()
        .map(|(_, path, _)| {
            let content = std::fs::read_to_string(path)
                .map_err(|e| SgError::Data(format!("{}: {e}", path.display())))?;
            parse_edge_file(&content, &path.display().to_string())
        })
        .collect();

    let mut ids = Vec::with_capacity(entries.len());
    let mut labels = Vec::with_capacity(entries.len());
    let mut loaded = Vec::with_capacity(entries.len());
    for ((id, _, label), graph) in entries.iter().zip(graphs) {
        ids.push(id.clone());
        labels.push(class_index[label.as_str()]);
        loaded.push(graph?);
    }
    let name = manifest_path
        .parent()
        .and_then(|p| p.file_name())
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "collection".into());
    Ok(GraphCollection {
        name,
        ids,
        graphs: loaded,
        labels,
        class_names,
        planted: None,
    })
}

/// What determines a generated graph's class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassRule {
    /// Class = planted cluster count (dense over the k range).
    ClusterCount,
    /// Class = index of the sign-noise level in `noise_choices`.
    NoiseBand,
}

/// Planted-partition generator settings.
#[derive(Debug, Clone)]
pub struct GeneratorConfig {
    pub n_graphs: usize,
    pub order_range: (usize, usize),
    pub cluster_range: (usize, usize),
    pub density_range: (f64, f64),
    pub noise_choices: Vec<f64>,
    pub class_rule: ClassRule,
    pub seed: u64,
}

impl GeneratorConfig {
    fn validate(&self) -> Result<()> {
        let (n_lo, n_hi) = self.order_range;
        let (k_lo, k_hi) = self.cluster_range;
        let (d_lo, d_hi) = self.density_range;
        if self.n_graphs == 0 || n_lo == 0 || n_lo > n_hi || k_lo == 0 || k_lo > k_hi {
            return Err(SgError::Config("generator ranges must be non-empty".into()));
        }
        if !(0.0 < d_lo && d_lo <= d_hi && d_hi <= 1.0) {
            return Err(SgError::Config("density must lie in (0, 1]".into()));
        }
        if self.noise_choices.is_empty()
            || self.noise_choices.iter().any(|&q| !(0.0..0.5).contains(&q))
        {
            return Err(SgError::Config("sign noise must lie in [0, 0.5)".into()));
        }
        if k_hi > n_lo {
            return Err(SgError::Config("cluster count may exceed the smallest order".into()));
        }
        Ok(())
    }
}

/// Generates a labeled collection of planted-partition graphs. Each
/// graph draws its own order, cluster count, density and noise level
/// from the configured ranges; vertices are split into near-even
/// clusters, each pair becomes an edge with the drawn density, signs
/// follow the partition and then flip independently with the noise
/// probability.
pub fn generate_planted(config: &GeneratorConfig) -> Result<GraphCollection> {
    config.validate()?;
    let (n_lo, n_hi) = config.order_range;
    let (k_lo, k_hi) = config.cluster_range;
    let (d_lo, d_hi) = config.density_range;

    let mut ids = Vec::with_capacity(config.n_graphs);
    let mut graphs = Vec::with_capacity(config.n_graphs);
    let mut labels = Vec::with_capacity(config.n_graphs);
    let mut planted = Vec::with_capacity(config.n_graphs);
    for i in 0..config.n_graphs {
        let id = format!("g{i:05}");
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "generate", &id));
        let n = rng.gen_range(n_lo..=n_hi);
        let k = rng.gen_range(k_lo..=k_hi.min(n));
        let density = if d_lo == d_hi { d_lo } else { rng.gen_range(d_lo..d_hi) };
        let noise_idx = rng.gen_range(0..config.noise_choices.len());
        let q = config.noise_choices[noise_idx];

        // Near-even clusters over a shuffled vertex order.
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut assignment = vec![0usize; n];
        for (pos, &v) in order.iter().enumerate() {
            assignment[v] = pos % k;
        }
        let partition = Partition::new(&assignment);

        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen::<f64>() >= density {
                    continue;
                }
                let mut sign = if partition.cluster_of(u) == partition.cluster_of(v) {
                    Sign::Positive
                } else {
                    Sign::Negative
                };
                if rng.gen::<f64>() < q {
                    sign = sign.flipped();
                }
                edges.push((u, v, sign));
            }
        }
        let label = match config.class_rule {
            ClassRule::ClusterCount => k - k_lo,
            ClassRule::NoiseBand => noise_idx,
        };
        ids.push(id);
        graphs.push(SignedGraph::new(n, edges)?);
        labels.push(label);
        planted.push(partition);
    }
    let class_names: Vec<String> = match config.class_rule {
        ClassRule::ClusterCount => (k_lo..=k_hi).map(|k| format!("k{k}")).collect(),
        ClassRule::NoiseBand => config
            .noise_choices
            .iter()
            .map(|q| format!("q{q}"))
            .collect(),
    };
    // Classes that happened to draw no graphs would break downstream
    // validation; keep only names that occur and re-densify.
    let mut used: Vec<usize> = labels.iter().copied().collect();
    used.sort_unstable();
    used.dedup();
    let remap: HashMap<usize, usize> = used.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let labels = labels.iter().map(|l| remap[l]).collect();
    let class_names = used
        .iter()
        .map(|&c| class_names[c].clone())
        .collect();
    Ok(GraphCollection {
        name: "generated".into(),
        ids,
        graphs,
        labels,
        class_names,
        planted: Some(planted),
    })
}

/// Mean/stddev/min/max of one per-graph quantity.
#[derive(Debug, Clone)]
pub struct ColumnStats {
    pub mean: f64,
    pub stddev: f64,
    pub min: f64,
    pub max: f64,
}

fn column(values: &[f64]) -> ColumnStats {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    ColumnStats {
        mean,
        stddev: var.sqrt(),
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Per-collection aggregates mirroring a dataset-summary table.
#[derive(Debug, Clone)]
pub struct CollectionStats {
    pub graphs: usize,
    pub classes: usize,
    pub imbalance: f64,
    pub order: ColumnStats,
    pub density: ColumnStats,
    pub positive_edges: ColumnStats,
    pub negative_edges: ColumnStats,
    pub positive_proportion: ColumnStats,
    pub diameter: ColumnStats,
    pub sb_frustration_ratio: ColumnStats,
    pub gb_frustration_ratio: ColumnStats,
    /// Per graph: whether the SB / GB solver was exact.
    pub exact_flags: Vec<(bool, bool)>,
}

/// Computes the summary table. Frustration uses the exact solver within
/// its size caps and seeded local search beyond them; which one ran is
/// recorded per graph.
pub fn collection_stats(collection: &GraphCollection, seed: u64) -> CollectionStats {
    let per_graph: Vec<(f64, f64, f64, f64, f64, f64, f64, f64, bool, bool)> = collection
        .graphs
        .par_iter()
        .zip(collection.ids.par_iter())
        .map(|(g, id)| {
            let s = g.stats();
            let graph_seed = derive_seed(seed, "stats", id);
            let (sb, sb_exact) = solve_partition(g, BalanceMode::Bisection, graph_seed);
            let (gb, gb_exact) = solve_partition(g, BalanceMode::FreeK, graph_seed);
            let diameter = g.diameter() as f64;
            (
                g.order() as f64,
                s.density,
                g.positive_edge_count() as f64,
                g.negative_edge_count() as f64,
                s.positive_edge_proportion,
                diameter,
                sb.frustration_ratio,
                gb.frustration_ratio,
                sb_exact,
                gb_exact,
            )
        })
        .collect();
    let pick = |f: &dyn Fn(&(f64, f64, f64, f64, f64, f64, f64, f64, bool, bool)) -> f64| {
        column(&per_graph.iter().map(f).collect::<Vec<f64>>())
    };
    CollectionStats {
        graphs: collection.len(),
        classes: collection.class_names.len(),
        imbalance: crate::eval::class_imbalance_index(&collection.labels),
        order: pick(&|r| r.0),
        density: pick(&|r| r.1),
        positive_edges: pick(&|r| r.2),
        negative_edges: pick(&|r| r.3),
        positive_proportion: pick(&|r| r.4),
        diameter: column(
            &per_graph
                .iter()
                .map(|r| r.5)
                .filter(|d| d.is_finite())
                .collect::<Vec<f64>>(),
        ),
        sb_frustration_ratio: pick(&|r| r.6),
        gb_frustration_ratio: pick(&|r| r.7),
        exact_flags: per_graph.iter().map(|r| (r.8, r.9)).collect(),
    }
}

impl CollectionStats {
    /// CSV with one row per statistic.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("statistic,mean,stddev,min,max\n");
        let mut push = |name: &str, c: &ColumnStats| {
            let _ = writeln!(
                out,
                "{name},{:.4},{:.4},{:.4},{:.4}",
                c.mean, c.stddev, c.min, c.max
            );
        };
        push("order", &self.order);
        push("density", &self.density);
        push("positive_edges", &self.positive_edges);
        push("negative_edges", &self.negative_edges);
        push("positive_proportion", &self.positive_proportion);
        push("diameter", &self.diameter);
        push("sb_frustration_ratio", &self.sb_frustration_ratio);
        push("gb_frustration_ratio", &self.gb_frustration_ratio);
        let _ = writeln!(out, "graphs,{},,,", self.graphs);
        let _ = writeln!(out, "classes,{},,,", self.classes);
        let _ = writeln!(out, "class_imbalance_gini_impurity,{:.4},,,", self.imbalance);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::balance::{frustration_of_partition, is_balanced, BalanceKind};
    use crate::graph::fixtures::*;

    fn tiny_collection() -> GraphCollection {
        GraphCollection {
            name: "tiny".into(),
            ids: vec!["a".into(), "b".into()],
            graphs: vec![balanced_two_clusters(), balanced_three_clusters()],
            labels: vec![0, 1],
            class_names: vec!["two".into(), "three".into()],
            planted: None,
        }
    }

    #[test]
    fn round_trip_preserves_collection() {
        let c = tiny_collection();
        let dir = tempfile::tempdir().unwrap();
        let manifest = save_collection(dir.path(), &c).unwrap();
        let loaded = load_collection(&manifest).unwrap();
        assert_eq!(loaded.ids, c.ids);
        assert_eq!(loaded.graphs, c.graphs);
        // Class names load in sorted order; labels must still align.
        for (i, &l) in loaded.labels.iter().enumerate() {
            assert_eq!(loaded.class_names[l], c.class_names[c.labels[i]]);
        }
        // Byte-stable: saving again yields identical files.
        let dir2 = tempfile::tempdir().unwrap();
        save_collection(dir2.path(), &c).unwrap();
        for id in &c.ids {
            let a = std::fs::read(dir.path().join(format!("{id}.edges"))).unwrap();
            let b = std::fs::read(dir2.path().join(format!("{id}.edges"))).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn edgeless_graph_with_declared_order() {
        let g = parse_edge_file("# empty\nn 4\n", "test").unwrap();
        assert_eq!(g.order(), 4);
        assert_eq!(g.size(), 0);
    }

    #[test]
    fn parse_errors_name_file_and_line() {
        let err = parse_edge_file("0 1 +1\n0 0 +1\n", "graph.edges").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("graph.edges:2"), "{msg}");
        assert!(msg.contains("self-loop"), "{msg}");

        let err = parse_edge_file("0 1 +2\n", "graph.edges").unwrap_err();
        assert!(err.to_string().contains("unknown sign token"));

        let err = parse_edge_file("0 1 +1\n1 0 -1\n", "dup.edges").unwrap_err();
        assert!(err.to_string().contains("dup.edges"));
    }

    #[test]
    fn dense_remapping_without_declaration() {
        let g = parse_edge_file("10 30 +1\n30 700 -1\n", "test").unwrap();
        assert_eq!(g.order(), 3);
        assert_eq!(g.edge_sign(0, 1), Some(Sign::Positive));
        assert_eq!(g.edge_sign(1, 2), Some(Sign::Negative));
    }

    #[test]
    fn manifest_errors() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = dir.path().join("manifest.csv");
        std::fs::write(&manifest, "graph_id,path,label\na,missing.edges,x\n").unwrap();
        let err = load_collection(&manifest).unwrap_err();
        assert!(err.to_string().contains("missing.edges"));

        std::fs::write(&manifest, "wrong,header\n").unwrap();
        assert!(load_collection(&manifest).is_err());

        std::fs::write(dir.path().join("a.edges"), "n 2\n0 1 +1\n").unwrap();
        std::fs::write(
            &manifest,
            "graph_id,path,label\na,a.edges,x\na,a.edges,y\n",
        )
        .unwrap();
        let err = load_collection(&manifest).unwrap_err();
        assert!(err.to_string().contains("duplicate graph id"));
    }

    fn base_config() -> GeneratorConfig {
        GeneratorConfig {
            n_graphs: 10,
            order_range: (12, 12),
            cluster_range: (2, 2),
            density_range: (1.0, 1.0),
            noise_choices: vec![0.0],
            class_rule: ClassRule::ClusterCount,
            seed: 1,
        }
    }

    #[test]
    fn noiseless_planted_bisection_is_recoverable() {
        let c = generate_planted(&base_config()).unwrap();
        for (g, planted) in c.graphs.iter().zip(c.planted.as_ref().unwrap()) {
            let (result, exact) = solve_partition(g, BalanceMode::Bisection, 0);
            assert!(exact);
            assert_eq!(result.frustrated_edge_count, 0);
            // Recovered partition matches the planted one up to
            // relabeling; normalized assignments are directly equal.
            assert_eq!(result.partition.assignment(), planted.assignment());
        }
    }

    #[test]
    fn noise_rate_matches_planted_frustration() {
        let config = GeneratorConfig {
            n_graphs: 200,
            order_range: (20, 20),
            noise_choices: vec![0.1],
            ..base_config()
        };
        let c = generate_planted(&config).unwrap();
        let planted = c.planted.as_ref().unwrap();
        let mut ratios = Vec::new();
        for (g, p) in c.graphs.iter().zip(planted) {
            let frustrated = frustration_of_partition(g, p).unwrap();
            ratios.push(frustrated as f64 / g.size() as f64);
        }
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        assert!((0.05..=0.15).contains(&mean), "mean planted ratio {mean}");
        // Exact bisection can only do at least as well as the planted
        // partition; cross-check on a subsample.
        for (g, p) in c.graphs.iter().zip(planted).take(30) {
            let (result, exact) = solve_partition(g, BalanceMode::Bisection, 0);
            assert!(exact);
            assert!(result.frustrated_edge_count <= frustration_of_partition(g, p).unwrap());
        }
    }

    #[test]
    fn generation_deterministic() {
        let config = GeneratorConfig {
            n_graphs: 8,
            order_range: (8, 14),
            cluster_range: (1, 3),
            density_range: (0.4, 0.9),
            noise_choices: vec![0.05, 0.15],
            class_rule: ClassRule::NoiseBand,
            seed: 42,
        };
        let a = generate_planted(&config).unwrap();
        let b = generate_planted(&config).unwrap();
        assert_eq!(a, b);
        let c = generate_planted(&GeneratorConfig { seed: 43, ..config }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn edge_count_concentrates_at_binomial_mean() {
        let config = GeneratorConfig {
            n_graphs: 50,
            order_range: (16, 16),
            density_range: (0.4, 0.4),
            ..base_config()
        };
        let c = generate_planted(&config).unwrap();
        let pairs = 16.0 * 15.0 / 2.0;
        let mean = 0.4 * pairs;
        let std = (pairs * 0.4 * 0.6_f64).sqrt();
        for g in &c.graphs {
            let m = g.size() as f64;
            assert!((m - mean).abs() <= 5.0 * std, "edge count {m} vs mean {mean}");
        }
    }

    #[test]
    fn noiseless_multicluster_graphs_are_generalized_balanced() {
        let config = GeneratorConfig {
            n_graphs: 12,
            order_range: (9, 12),
            cluster_range: (1, 3),
            ..base_config()
        };
        let c = generate_planted(&config).unwrap();
        for g in &c.graphs {
            assert!(is_balanced(g, BalanceKind::Generalized));
        }
    }

    #[test]
    fn class_rules_assign_expected_labels() {
        let config = GeneratorConfig {
            n_graphs: 30,
            order_range: (8, 10),
            cluster_range: (1, 3),
            density_range: (0.8, 0.9),
            noise_choices: vec![0.0, 0.2],
            class_rule: ClassRule::ClusterCount,
            seed: 5,
        };
        let c = generate_planted(&config).unwrap();
        for (g, (&label, planted)) in c
            .graphs
            .iter()
            .zip(c.labels.iter().zip(c.planted.as_ref().unwrap()))
        {
            assert_eq!(c.class_names[label], format!("k{}", planted.cluster_count()));
            let _ = g;
        }
        let nb = generate_planted(&GeneratorConfig {
            class_rule: ClassRule::NoiseBand,
            ..config
        })
        .unwrap();
        assert!(nb.class_names.iter().all(|n| n.starts_with('q')));
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut c = base_config();
        c.density_range = (0.0, 0.5);
        assert!(generate_planted(&c).is_err());
        let mut c = base_config();
        c.noise_choices = vec![0.6];
        assert!(generate_planted(&c).is_err());
        let mut c = base_config();
        c.cluster_range = (3, 2);
        assert!(generate_planted(&c).is_err());
    }

    #[test]
    fn stats_identical_graphs_zero_stddev() {
        let g = balanced_two_clusters();
        let c = GraphCollection {
            name: "dup".into(),
            ids: vec!["a".into(), "b".into()],
            graphs: vec![g.clone(), g],
            labels: vec![0, 1],
            class_names: vec!["x".into(), "y".into()],
            planted: None,
        };
        let stats = collection_stats(&c, 0);
        assert_eq!(stats.order.stddev, 0.0);
        assert_eq!(stats.density.stddev, 0.0);
        assert_eq!(stats.sb_frustration_ratio.stddev, 0.0);
        assert_eq!(stats.gb_frustration_ratio.stddev, 0.0);
    }

    #[test]
    fn stats_mix_of_balanced_and_frustrated() {
        let c = tiny_collection();
        // The three-cluster graph is generalized-balanced but not
        // bisectable without frustration; get its exact value from the
        // solver as the oracle.
        let (sb_b, exact) =
            solve_partition(&balanced_three_clusters(), BalanceMode::Bisection, 0);
        assert!(exact);
        let x = sb_b.frustration_ratio;
        assert!(x > 0.0);
        let stats = collection_stats(&c, 0);
        assert!((stats.sb_frustration_ratio.mean - x / 2.0).abs() < 1e-12);
        assert_eq!(stats.gb_frustration_ratio.mean, 0.0);
        assert!(stats.exact_flags.iter().all(|&(a, b)| a && b));
    }

    #[test]
    fn stats_csv_layout() {
        let c = tiny_collection();
        let csv = collection_stats(&c, 0).to_csv();
        assert!(csv.starts_with("statistic,mean,stddev,min,max\n"));
        for key in [
            "order,",
            "density,",
            "positive_proportion,",
            "sb_frustration_ratio,",
            "gb_frustration_ratio,",
            "class_imbalance_gini_impurity,",
        ] {
            assert!(csv.contains(key), "missing {key} in {csv}");
        }
    }
}
