//! Structural-balance tests, frustration of a partition, an exact
//! minimum-frustration solver at desk scale, and a local-search solver
//! for larger graphs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SgError};
use crate::graph::{Sign, SignedGraph};

/// Largest order accepted by the exact bisection solver (2^(n-1) states).
pub const EXACT_BISECTION_CAP: usize = 20;
/// Largest order accepted by the exact free-k solver (Bell-number states).
pub const EXACT_FREE_K_CAP: usize = 12;

/// Cluster assignment of vertices, normalized so cluster ids appear in
/// first-occurrence order starting at 0.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Partition {
    assignment: Vec<usize>,
    k: usize,
}

impl Partition {
    /// Normalizes an arbitrary assignment by relabeling cluster ids in
    /// first-occurrence order.
    pub fn new(raw: &[usize]) -> Partition {
        let mut remap: Vec<Option<usize>> = vec![None; raw.len().max(raw.iter().max().map_or(0, |m| m + 1))];
        let mut next = 0;
        let mut assignment = Vec::with_capacity(raw.len());
        for &c in raw {
            let id = *remap[c].get_or_insert_with(|| {
                let id = next;
                next += 1;
                id
            });
            assignment.push(id);
        }
        Partition {
            assignment,
            k: next,
        }
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn cluster_count(&self) -> usize {
        self.k
    }

    pub fn cluster_of(&self, u: usize) -> usize {
        self.assignment[u]
    }

    /// Members of each cluster, sorted.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (u, &c) in self.assignment.iter().enumerate() {
            out[c].push(u);
        }
        out
    }
}

/// Frustration count and ratio of a partition.
#[derive(Debug, Clone, PartialEq)]
pub struct FrustrationResult {
    pub frustrated_edge_count: usize,
    pub frustration_ratio: f64,
    pub partition: Partition,
}

impl FrustrationResult {
    fn from_count(g: &SignedGraph, count: usize, partition: Partition) -> FrustrationResult {
        let m = g.size();
        FrustrationResult {
            frustrated_edge_count: count,
            frustration_ratio: if m == 0 { 0.0 } else { count as f64 / m as f64 },
            partition,
        }
    }
}

/// Optimization mode: partitions into at most two clusters (strict
/// structural balance) or into any number of clusters (generalized).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BalanceMode {
    Bisection,
    FreeK,
}

/// Balance definition used by [`is_balanced`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BalanceKind {
    Strict,
    Generalized,
}

/// Edges violating the partition: positive between clusters or negative
/// within one.
pub fn frustration_of_partition(g: &SignedGraph, p: &Partition) -> Result<usize> {
    if p.assignment.len() != g.order() {
        return Err(SgError::Domain(format!(
            "partition length {} does not match order {}",
            p.assignment.len(),
            g.order()
        )));
    }
    Ok(count_frustrated(g, &p.assignment))
}

fn count_frustrated(g: &SignedGraph, assignment: &[usize]) -> usize {
    g.edges()
        .iter()
        .filter(|&&(u, v, s)| match s {
            Sign::Positive => assignment[u] != assignment[v],
            Sign::Negative => assignment[u] == assignment[v],
        })
        .count()
}

/// Globally minimal frustration by plain enumeration with vertex 0
/// pinned to cluster 0. Ties go to the lexicographically smallest
/// assignment vector.
pub fn exact_min_frustration(g: &SignedGraph, mode: BalanceMode) -> Result<FrustrationResult> {
    let n = g.order();
    let cap = match mode {
        BalanceMode::Bisection => EXACT_BISECTION_CAP,
        BalanceMode::FreeK => EXACT_FREE_K_CAP,
    };
    if n > cap {
        return Err(SgError::Capacity(format!(
            "order {n} exceeds exact cap {cap}; use local_search_min_frustration"
        )));
    }
    if n == 0 {
        return Ok(FrustrationResult::from_count(g, 0, Partition::new(&[])));
    }
    let mut best: Option<(usize, Vec<usize>)> = None;
    match mode {
        BalanceMode::Bisection => {
            // Counter with vertex 1 as the most significant bit walks the
            // assignment vectors in lexicographic order.
            for mask in 0u64..(1u64 << (n - 1)) {
                let mut assignment = vec![0usize; n];
                for i in 1..n {
                    assignment[i] = ((mask >> (n - 1 - i)) & 1) as usize;
                }
                let count = count_frustrated(g, &assignment);
                if best.as_ref().map_or(true, |(b, _)| count < *b) {
                    best = Some((count, assignment));
                }
            }
        }
        BalanceMode::FreeK => {
            // Restricted growth strings enumerate canonical set
            // partitions in lexicographic order.
            let mut assignment = vec![0usize; n];
            loop {
                let count = count_frustrated(g, &assignment);
                if best.as_ref().map_or(true, |(b, _)| count < *b) {
                    best = Some((count, assignment.clone()));
                }
                // Advance to the next restricted growth string.
                let mut advanced = false;
                let mut i = n - 1;
                while i >= 1 {
                    let max_prefix = assignment[..i].iter().copied().max().unwrap();
                    if assignment[i] <= max_prefix {
                        assignment[i] += 1;
                        for a in assignment[i + 1..].iter_mut() {
                            *a = 0;
                        }
                        advanced = true;
                        break;
                    }
                    assignment[i] = 0;
                    i -= 1;
                }
                if !advanced {
                    break;
                }
            }
        }
    }
    let (count, assignment) = best.unwrap();
    Ok(FrustrationResult::from_count(g, count, Partition::new(&assignment)))
}

/// Best-of-restarts single-vertex-move hill climbing. Free-k mode also
/// allows moving a vertex into a fresh singleton cluster and merging two
/// clusters. Deterministic given the seed; result is an upper bound on
/// the exact optimum.
pub fn local_search_min_frustration(
    g: &SignedGraph,
    mode: BalanceMode,
    restarts: usize,
    seed: u64,
) -> FrustrationResult {
    let n = g.order();
    if n == 0 {
        return FrustrationResult::from_count(g, 0, Partition::new(&[]));
    }
    let restarts = restarts.max(1);
    let mut best: Option<(usize, Partition)> = None;
    for r in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
        let mut assignment: Vec<usize> = match mode {
            BalanceMode::Bisection => (0..n).map(|_| rng.gen_range(0..2usize)).collect(),
            BalanceMode::FreeK => (0..n).map(|_| rng.gen_range(0..n)).collect(),
        };
        let mut count = count_frustrated(g, &assignment);
        hill_climb(g, mode, &mut assignment, &mut count);
        let partition = Partition::new(&assignment);
        let candidate = (count, partition);
        if best
            .as_ref()
            .map_or(true, |b| (candidate.0, &candidate.1) < (b.0, &b.1))
        {
            best = Some(candidate);
        }
    }
    let (count, partition) = best.unwrap();
    FrustrationResult::from_count(g, count, partition)
}

/// First-improvement scan: lowest vertex id first, lowest destination
/// cluster id first, cluster merges last.
fn hill_climb(g: &SignedGraph, mode: BalanceMode, assignment: &mut Vec<usize>, count: &mut usize) {
    let n = assignment.len();
    loop {
        let mut improved = false;
        let k = assignment.iter().copied().max().unwrap() + 1;
        'moves: for u in 0..n {
            let current = assignment[u];
            let dests: Vec<usize> = match mode {
                BalanceMode::Bisection => (0..2).collect(),
                // Existing clusters plus one fresh singleton.
                BalanceMode::FreeK => (0..=k).collect(),
            };
            for dest in dests {
                if dest == current {
                    continue;
                }
                let delta = move_delta(g, assignment, u, dest);
                if delta < 0 {
                    assignment[u] = dest;
                    *count = (*count as isize + delta) as usize;
                    improved = true;
                    break 'moves;
                }
            }
        }
        if !improved && mode == BalanceMode::FreeK {
            let k = assignment.iter().copied().max().unwrap() + 1;
            'merges: for a in 0..k {
                for b in (a + 1)..k {
                    let delta = merge_delta(g, assignment, a, b);
                    if delta < 0 {
                        for c in assignment.iter_mut() {
                            if *c == b {
                                *c = a;
                            }
                        }
                        *count = (*count as isize + delta) as usize;
                        improved = true;
                        break 'merges;
                    }
                }
            }
        }
        if !improved {
            // Keep the assignment canonical between passes.
            let normalized = Partition::new(assignment);
            *assignment = normalized.assignment().to_vec();
            return;
        }
    }
}

fn move_delta(g: &SignedGraph, assignment: &[usize], u: usize, dest: usize) -> isize {
    let current = assignment[u];
    let mut delta = 0isize;
    for &(v, s) in g.adjacency(u) {
        let before = is_frustrated(s, assignment[v] == current);
        let after = is_frustrated(s, assignment[v] == dest);
        delta += after as isize - before as isize;
    }
    delta
}

fn merge_delta(g: &SignedGraph, assignment: &[usize], a: usize, b: usize) -> isize {
    let mut delta = 0isize;
    for &(u, v, s) in g.edges() {
        let (cu, cv) = (assignment[u], assignment[v]);
        let before = is_frustrated(s, cu == cv);
        let joined = |c: usize| if c == b { a } else { c };
        let after = is_frustrated(s, joined(cu) == joined(cv));
        delta += after as isize - before as isize;
    }
    delta
}

fn is_frustrated(s: Sign, same_cluster: bool) -> bool {
    match s {
        Sign::Positive => !same_cluster,
        Sign::Negative => same_cluster,
    }
}

/// Balance test without solving the optimization problem.
///
/// Strict: a two-coloring BFS must keep positive edges monochromatic and
/// negative edges bichromatic. Generalized: no negative edge may join two
/// vertices of the same positive-only component.
pub fn is_balanced(g: &SignedGraph, kind: BalanceKind) -> bool {
    match kind {
        BalanceKind::Strict => {
            let n = g.order();
            let mut color: Vec<Option<u8>> = vec![None; n];
            for start in 0..n {
                if color[start].is_some() {
                    continue;
                }
                color[start] = Some(0);
                let mut queue = std::collections::VecDeque::from([start]);
                while let Some(u) = queue.pop_front() {
                    let cu = color[u].unwrap();
                    for &(v, s) in g.adjacency(u) {
                        let expected = match s {
                            Sign::Positive => cu,
                            Sign::Negative => 1 - cu,
                        };
                        match color[v] {
                            None => {
                                color[v] = Some(expected);
                                queue.push_back(v);
                            }
                            Some(cv) if cv != expected => return false,
                            Some(_) => {}
                        }
                    }
                }
            }
            true
        }
        BalanceKind::Generalized => {
            let n = g.order();
            let mut parent: Vec<usize> = (0..n).collect();
            fn find(parent: &mut Vec<usize>, x: usize) -> usize {
                if parent[x] != x {
                    let root = find(parent, parent[x]);
                    parent[x] = root;
                }
                parent[x]
            }
            for &(u, v, s) in g.edges() {
                if s == Sign::Positive {
                    let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
                    parent[ru] = rv;
                }
            }
            g.edges().iter().all(|&(u, v, s)| {
                s == Sign::Positive || find(&mut parent, u) != find(&mut parent, v)
            })
        }
    }
}

/// Default partition source for master-node wiring: exact solve within
/// caps, otherwise local search with a fixed restart budget.
pub fn solve_partition(g: &SignedGraph, mode: BalanceMode, seed: u64) -> (FrustrationResult, bool) {
    match exact_min_frustration(g, mode) {
        Ok(r) => (r, true),
        Err(_) => (local_search_min_frustration(g, mode, 20, seed), false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;

    #[test]
    fn frustration_of_shown_clustering_is_zero() {
        let g = balanced_two_clusters();
        let p = Partition::new(&[0, 0, 0, 1, 1, 1, 1]);
        assert_eq!(frustration_of_partition(&g, &p).unwrap(), 0);
    }

    #[test]
    fn frustration_single_cluster_counts_negative_edges() {
        let g = balanced_two_clusters();
        let p = Partition::new(&[0; 7]);
        assert_eq!(frustration_of_partition(&g, &p).unwrap(), 3);
    }

    #[test]
    fn frustration_singletons_counts_positive_edges() {
        for seed in 0..5u64 {
            let g = random_graph(8, 0.5, 0.4, seed);
            let p = Partition::new(&(0..8).collect::<Vec<_>>());
            assert_eq!(
                frustration_of_partition(&g, &p).unwrap(),
                g.positive_edge_count()
            );
        }
    }

    #[test]
    fn frustration_invariant_under_cluster_relabeling() {
        let g = balanced_three_clusters();
        let a = Partition::new(&[0, 0, 0, 1, 1, 2, 2, 2]);
        let b = Partition::new(&[2, 2, 2, 0, 0, 1, 1, 1]);
        assert_eq!(
            frustration_of_partition(&g, &a).unwrap(),
            frustration_of_partition(&g, &b).unwrap()
        );
    }

    #[test]
    fn frustration_length_mismatch() {
        let g = balanced_two_clusters();
        assert!(frustration_of_partition(&g, &Partition::new(&[0, 1])).is_err());
    }

    #[test]
    fn exact_bisection_on_balanced_graph() {
        let g = balanced_two_clusters();
        let r = exact_min_frustration(&g, BalanceMode::Bisection).unwrap();
        assert_eq!(r.frustrated_edge_count, 0);
        assert_eq!(r.partition.assignment(), &[0, 0, 0, 1, 1, 1, 1]);
    }

    #[test]
    fn exact_free_k_on_three_cluster_graph() {
        let g = balanced_three_clusters();
        let r = exact_min_frustration(&g, BalanceMode::FreeK).unwrap();
        assert_eq!(r.frustrated_edge_count, 0);
        assert_eq!(r.partition.cluster_count(), 3);
        assert_eq!(r.partition.assignment(), &[0, 0, 0, 1, 1, 2, 2, 2]);
    }

    #[test]
    fn exact_solver_respects_caps() {
        let g = random_graph(21, 0.2, 0.5, 1);
        assert!(matches!(
            exact_min_frustration(&g, BalanceMode::Bisection),
            Err(SgError::Capacity(_))
        ));
        let g = random_graph(13, 0.2, 0.5, 1);
        assert!(matches!(
            exact_min_frustration(&g, BalanceMode::FreeK),
            Err(SgError::Capacity(_))
        ));
    }

    /// Independent brute force: try every assignment of n vertices to k
    /// clusters with a plain k^n counter.
    fn brute_force_min(g: &SignedGraph, max_k: usize) -> usize {
        let n = g.order();
        let mut best = usize::MAX;
        let mut assignment = vec![0usize; n];
        loop {
            best = best.min(count_frustrated(g, &assignment));
            let mut i = 0;
            loop {
                if i == n {
                    return best;
                }
                assignment[i] += 1;
                if assignment[i] < max_k {
                    break;
                }
                assignment[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn exact_matches_brute_force_enumerator() {
        for seed in 0..15u64 {
            let g = random_graph(7, 0.5, 0.4, seed);
            let bis = exact_min_frustration(&g, BalanceMode::Bisection).unwrap();
            assert_eq!(bis.frustrated_edge_count, brute_force_min(&g, 2));
            let free = exact_min_frustration(&g, BalanceMode::FreeK).unwrap();
            assert_eq!(free.frustrated_edge_count, brute_force_min(&g, 7));
            assert!(free.frustrated_edge_count <= bis.frustrated_edge_count);
        }
    }

    #[test]
    fn local_search_reaches_planted_optimum() {
        let g = balanced_two_clusters();
        for seed in [0u64, 42, 1234] {
            let r = local_search_min_frustration(&g, BalanceMode::Bisection, 5, seed);
            assert_eq!(r.frustrated_edge_count, 0);
        }
    }

    #[test]
    fn local_search_all_positive_free_k_is_single_cluster() {
        let g = random_graph(8, 1.0, 0.0, 3);
        let r = local_search_min_frustration(&g, BalanceMode::FreeK, 3, 9);
        assert_eq!(r.frustrated_edge_count, 0);
        assert_eq!(r.partition.cluster_count(), 1);
    }

    #[test]
    fn local_search_usually_matches_exact() {
        let mut hits = 0;
        let trials = 40;
        for seed in 0..trials {
            let g = random_graph(10, 0.4, 0.4, 1000 + seed);
            let exact = exact_min_frustration(&g, BalanceMode::Bisection).unwrap();
            let ls = local_search_min_frustration(&g, BalanceMode::Bisection, 50, seed);
            assert!(ls.frustrated_edge_count >= exact.frustrated_edge_count);
            if ls.frustrated_edge_count == exact.frustrated_edge_count {
                hits += 1;
            }
        }
        assert!(hits * 10 >= trials * 9, "only {hits}/{trials} matched");
    }

    #[test]
    fn local_search_deterministic() {
        let g = random_graph(12, 0.4, 0.4, 5);
        let a = local_search_min_frustration(&g, BalanceMode::FreeK, 10, 77);
        let b = local_search_min_frustration(&g, BalanceMode::FreeK, 10, 77);
        assert_eq!(a, b);
    }

    #[test]
    fn is_balanced_examples() {
        assert!(is_balanced(&balanced_two_clusters(), BalanceKind::Strict));
        let g = balanced_three_clusters();
        assert!(!is_balanced(&g, BalanceKind::Strict));
        assert!(is_balanced(&g, BalanceKind::Generalized));
        let tri = SignedGraph::new(
            3,
            vec![
                (0, 1, Sign::Positive),
                (1, 2, Sign::Positive),
                (0, 2, Sign::Negative),
            ],
        )
        .unwrap();
        assert!(!is_balanced(&tri, BalanceKind::Strict));
        assert!(!is_balanced(&tri, BalanceKind::Generalized));
    }

    #[test]
    fn balance_iff_zero_frustration() {
        for seed in 0..40u64 {
            let g = random_graph(8, 0.4, 0.4, 2000 + seed);
            let sb = exact_min_frustration(&g, BalanceMode::Bisection).unwrap();
            let gb = exact_min_frustration(&g, BalanceMode::FreeK).unwrap();
            assert_eq!(
                is_balanced(&g, BalanceKind::Strict),
                sb.frustrated_edge_count == 0
            );
            assert_eq!(
                is_balanced(&g, BalanceKind::Generalized),
                gb.frustrated_edge_count == 0
            );
            assert!(gb.frustrated_edge_count <= sb.frustrated_edge_count);
        }
    }
}
