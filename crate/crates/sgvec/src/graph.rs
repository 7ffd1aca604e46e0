//! Signed-graph data model: neighborhoods, degrees, path signs, reachable
//! sets and per-graph statistics.
//!
//! Graphs are undirected, unweighted and simple. Vertex ids are dense
//! 0-based integers; loaders remap arbitrary names before construction.

use std::collections::BTreeSet;

use crate::error::{Result, SgError};

/// Edge sign. Products follow the usual multiplication rule:
/// `(-) * (-) = (+)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn product(self, other: Sign) -> Sign {
        if self == other {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Sign::Positive => '+',
            Sign::Negative => '-',
        }
    }
}

/// Neighborhood filter: all neighbors, or only one edge sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignFilter {
    Any,
    Positive,
    Negative,
}

/// Sign of a path given its edge signs: negative iff the number of
/// negative edges is odd.
pub fn path_sign(signs: &[Sign]) -> Result<Sign> {
    if signs.is_empty() {
        return Err(SgError::Domain("path_sign: empty sign list".into()));
    }
    let negatives = signs.iter().filter(|s| **s == Sign::Negative).count();
    Ok(if negatives % 2 == 1 {
        Sign::Negative
    } else {
        Sign::Positive
    })
}

/// Immutable undirected signed graph. Edges are stored normalized
/// (`u < v`) and sorted; adjacency lists are sorted by neighbor id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedGraph {
    n: usize,
    edges: Vec<(usize, usize, Sign)>,
    adj: Vec<Vec<(usize, Sign)>>,
}

impl SignedGraph {
    /// Builds a graph, rejecting self-loops, out-of-range endpoints and
    /// duplicate vertex pairs (regardless of sign).
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, Sign)>) -> Result<Self> {
        let mut normalized: Vec<(usize, usize, Sign)> = Vec::new();
        for (u, v, s) in edges {
            if u >= n || v >= n {
                return Err(SgError::Domain(format!(
                    "edge ({u},{v}) out of range for order {n}"
                )));
            }
            if u == v {
                return Err(SgError::Domain(format!("self-loop at vertex {u}")));
            }
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            normalized.push((a, b, s));
        }
        normalized.sort_unstable();
        for w in normalized.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(SgError::Domain(format!(
                    "duplicate edge ({},{})",
                    w[0].0, w[0].1
                )));
            }
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v, s) in &normalized {
            adj[u].push((v, s));
            adj[v].push((u, s));
        }
        for list in &mut adj {
            list.sort_unstable_by_key(|&(v, _)| v);
        }
        Ok(SignedGraph {
            n,
            edges: normalized,
            adj,
        })
    }

    /// Number of vertices (order).
    pub fn order(&self) -> usize {
        self.n
    }

    /// Number of edges (size).
    pub fn size(&self) -> usize {
        self.edges.len()
    }

    pub fn positive_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.2 == Sign::Positive).count()
    }

    pub fn negative_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.2 == Sign::Negative).count()
    }

    /// Normalized (`u < v`), sorted edge list.
    pub fn edges(&self) -> &[(usize, usize, Sign)] {
        &self.edges
    }

    /// Sign of the edge between `u` and `v` in either orientation.
    pub fn edge_sign(&self, u: usize, v: usize) -> Option<Sign> {
        self.adj.get(u)?.iter().find(|&&(w, _)| w == v).map(|&(_, s)| s)
    }

    fn check_vertex(&self, u: usize) -> Result<()> {
        if u >= self.n {
            return Err(SgError::Domain(format!(
                "vertex {u} out of range for order {}",
                self.n
            )));
        }
        Ok(())
    }

    /// N(u), N+(u) or N-(u), sorted ascending by vertex id.
    pub fn neighborhood(&self, u: usize, filter: SignFilter) -> Result<Vec<usize>> {
        self.check_vertex(u)?;
        Ok(self.adj[u]
            .iter()
            .filter(|&&(_, s)| match filter {
                SignFilter::Any => true,
                SignFilter::Positive => s == Sign::Positive,
                SignFilter::Negative => s == Sign::Negative,
            })
            .map(|&(v, _)| v)
            .collect())
    }

    /// Sorted adjacency list with signs.
    pub fn adjacency(&self, u: usize) -> &[(usize, Sign)] {
        &self.adj[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn positive_degree(&self, u: usize) -> usize {
        self.adj[u].iter().filter(|&&(_, s)| s == Sign::Positive).count()
    }

    pub fn negative_degree(&self, u: usize) -> usize {
        self.adj[u].iter().filter(|&&(_, s)| s == Sign::Negative).count()
    }

    /// Positive and negative reachable sets of `u`: vertices connected to
    /// `u` by a positive (resp. negative) shortest path. A vertex reached
    /// by equal-length paths of both signs appears in both sets. `u`
    /// itself belongs to neither.
    pub fn reachable_sets(&self, u: usize) -> Result<(BTreeSet<usize>, BTreeSet<usize>)> {
        self.check_vertex(u)?;
        let mut dist: Vec<Option<usize>> = vec![None; self.n];
        // Reachable-path signs at shortest distance, merged across all
        // shortest-path parents.
        let mut pos_reach = vec![false; self.n];
        let mut neg_reach = vec![false; self.n];
        dist[u] = Some(0);
        pos_reach[u] = true; // empty path counts as positive for extension
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(u);
        while let Some(w) = queue.pop_front() {
            let d = dist[w].unwrap();
            for &(v, s) in &self.adj[w] {
                match dist[v] {
                    None => {
                        dist[v] = Some(d + 1);
                        queue.push_back(v);
                    }
                    Some(dv) if dv != d + 1 => continue,
                    Some(_) => {}
                }
                match s {
                    Sign::Positive => {
                        pos_reach[v] |= pos_reach[w];
                        neg_reach[v] |= neg_reach[w];
                    }
                    Sign::Negative => {
                        pos_reach[v] |= neg_reach[w];
                        neg_reach[v] |= pos_reach[w];
                    }
                }
            }
        }
        let mut pos = BTreeSet::new();
        let mut neg = BTreeSet::new();
        for v in 0..self.n {
            if v == u || dist[v].is_none() {
                continue;
            }
            if pos_reach[v] {
                pos.insert(v);
            }
            if neg_reach[v] {
                neg.insert(v);
            }
        }
        Ok((pos, neg))
    }

    /// Number of vertices that sit in both reachable sets of `u`
    /// (equal-length shortest paths of opposing sign).
    pub fn reachable_sign_ties(&self, u: usize) -> Result<usize> {
        let (pos, neg) = self.reachable_sets(u)?;
        Ok(pos.intersection(&neg).count())
    }

    /// Unsigned shortest-path distances from `u` (`None` if unreachable).
    pub fn bfs_distances(&self, u: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[u] = Some(0);
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(u);
        while let Some(w) = queue.pop_front() {
            for &(v, _) in &self.adj[w] {
                if dist[v].is_none() {
                    dist[v] = Some(dist[w].unwrap() + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Longest shortest path between connected vertex pairs; 0 for graphs
    /// with no connected pair.
    pub fn diameter(&self) -> usize {
        let mut diam = 0;
        for u in 0..self.n {
            for d in self.bfs_distances(u).into_iter().flatten() {
                diam = diam.max(d);
            }
        }
        diam
    }

    /// Connected components (unsigned), each sorted ascending.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(w) = stack.pop() {
                for &(v, _) in &self.adj[w] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                        stack.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn stats(&self) -> GraphStats {
        let n = self.n;
        let m = self.size();
        let pos = self.positive_edge_count();
        let neg = m - pos;
        let density = if n < 2 {
            0.0
        } else {
            2.0 * m as f64 / (n as f64 * (n as f64 - 1.0))
        };
        let proportion = if m == 0 {
            0.0
        } else {
            100.0 * pos as f64 / m as f64
        };
        GraphStats {
            order: n,
            size: m,
            density,
            positive_edge_count: pos,
            negative_edge_count: neg,
            positive_edge_proportion: proportion,
        }
    }
}

/// Per-graph summary statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphStats {
    pub order: usize,
    pub size: usize,
    pub density: f64,
    pub positive_edge_count: usize,
    pub negative_edge_count: usize,
    pub positive_edge_proportion: f64,
}

/// Small hand-checked graphs shared by the test suites.
pub mod fixtures {
    use super::*;

    /// The balanced two-cluster example graph: clusters {0,1,2} and
    /// {3,4,5,6}, positive inside, negative between.
    pub fn balanced_two_clusters() -> SignedGraph {
        SignedGraph::new(
            7,
            vec![
                (0, 1, Sign::Positive),
                (0, 2, Sign::Positive),
                (1, 2, Sign::Positive),
                (1, 3, Sign::Negative),
                (2, 3, Sign::Negative),
                (2, 5, Sign::Negative),
                (3, 4, Sign::Positive),
                (3, 6, Sign::Positive),
                (4, 5, Sign::Positive),
                (5, 6, Sign::Positive),
            ],
        )
        .unwrap()
    }

    /// The three-cluster example graph: clusters {0,1,2}, {3,4}, {5,6,7}.
    pub fn balanced_three_clusters() -> SignedGraph {
        SignedGraph::new(
            8,
            vec![
                (0, 1, Sign::Positive),
                (0, 2, Sign::Positive),
                (1, 2, Sign::Positive),
                (3, 4, Sign::Positive),
                (5, 6, Sign::Positive),
                (5, 7, Sign::Positive),
                (1, 3, Sign::Negative),
                (1, 7, Sign::Negative),
                (2, 3, Sign::Negative),
                (2, 7, Sign::Negative),
                (3, 7, Sign::Negative),
                (4, 7, Sign::Negative),
                (4, 6, Sign::Negative),
            ],
        )
        .unwrap()
    }

    /// Four-vertex signed example: v1 +v2, -v3, +v4; v2 -v3.
    pub fn signed_four() -> SignedGraph {
        SignedGraph::new(
            4,
            vec![
                (0, 1, Sign::Positive),
                (0, 2, Sign::Negative),
                (0, 3, Sign::Positive),
                (1, 2, Sign::Negative),
            ],
        )
        .unwrap()
    }

    /// Unsigned skeleton of `signed_four` (all edges positive).
    pub fn unsigned_four() -> SignedGraph {
        SignedGraph::new(
            4,
            vec![
                (0, 1, Sign::Positive),
                (0, 2, Sign::Positive),
                (0, 3, Sign::Positive),
                (1, 2, Sign::Positive),
            ],
        )
        .unwrap()
    }

    pub fn random_graph(n: usize, edge_prob: f64, neg_prob: f64, seed: u64) -> SignedGraph {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.gen::<f64>() < edge_prob {
                    let s = if rng.gen::<f64>() < neg_prob {
                        Sign::Negative
                    } else {
                        Sign::Positive
                    };
                    edges.push((u, v, s));
                }
            }
        }
        SignedGraph::new(n, edges).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn neighborhood_signed_four() {
        let g = signed_four();
        assert_eq!(g.neighborhood(0, SignFilter::Positive).unwrap(), vec![1, 3]);
        assert_eq!(g.neighborhood(0, SignFilter::Negative).unwrap(), vec![2]);
        assert_eq!(g.positive_degree(0), 2);
        assert_eq!(g.negative_degree(0), 1);
    }

    #[test]
    fn neighborhood_isolated_vertex() {
        let g = SignedGraph::new(3, vec![(0, 1, Sign::Positive)]).unwrap();
        assert!(g.neighborhood(2, SignFilter::Any).unwrap().is_empty());
        assert!(g.neighborhood(2, SignFilter::Positive).unwrap().is_empty());
    }

    #[test]
    fn neighborhood_out_of_range() {
        let g = signed_four();
        assert!(g.neighborhood(4, SignFilter::Any).is_err());
    }

    #[test]
    fn neighborhood_matches_adjacency_matrix_oracle() {
        for seed in 0..20u64 {
            let g = random_graph(8, 0.5, 0.4, seed);
            // Dense-matrix oracle, built edge by edge.
            let mut mat = vec![vec![None; 8]; 8];
            for &(u, v, s) in g.edges() {
                mat[u][v] = Some(s);
                mat[v][u] = Some(s);
            }
            for u in 0..8 {
                let any: Vec<usize> = (0..8).filter(|&v| mat[u][v].is_some()).collect();
                let pos: Vec<usize> =
                    (0..8).filter(|&v| mat[u][v] == Some(Sign::Positive)).collect();
                let neg: Vec<usize> =
                    (0..8).filter(|&v| mat[u][v] == Some(Sign::Negative)).collect();
                assert_eq!(g.neighborhood(u, SignFilter::Any).unwrap(), any);
                assert_eq!(g.neighborhood(u, SignFilter::Positive).unwrap(), pos);
                assert_eq!(g.neighborhood(u, SignFilter::Negative).unwrap(), neg);
                assert_eq!(g.degree(u), g.positive_degree(u) + g.negative_degree(u));
            }
        }
    }

    #[test]
    fn degree_sum_is_twice_size() {
        for seed in 0..10u64 {
            let g = random_graph(9, 0.4, 0.5, seed);
            let total: usize = (0..g.order()).map(|u| g.degree(u)).sum();
            assert_eq!(total, 2 * g.size());
        }
    }

    #[test]
    fn path_sign_examples() {
        assert_eq!(
            path_sign(&[Sign::Negative, Sign::Negative]).unwrap(),
            Sign::Positive
        );
        assert_eq!(path_sign(&[Sign::Positive]).unwrap(), Sign::Positive);
        assert!(path_sign(&[]).is_err());
    }

    #[test]
    fn path_sign_matches_fold_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let len = rng.gen_range(1..12);
            let signs: Vec<Sign> = (0..len)
                .map(|_| {
                    if rng.gen::<bool>() {
                        Sign::Positive
                    } else {
                        Sign::Negative
                    }
                })
                .collect();
            let folded = signs[1..]
                .iter()
                .fold(signs[0], |acc, &s| acc.product(s));
            assert_eq!(path_sign(&signs).unwrap(), folded);
        }
    }

    #[test]
    fn path_sign_associative_under_concatenation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let a: Vec<Sign> = (0..rng.gen_range(1..6))
                .map(|_| if rng.gen::<bool>() { Sign::Positive } else { Sign::Negative })
                .collect();
            let b: Vec<Sign> = (0..rng.gen_range(1..6))
                .map(|_| if rng.gen::<bool>() { Sign::Positive } else { Sign::Negative })
                .collect();
            let mut ab = a.clone();
            ab.extend_from_slice(&b);
            assert_eq!(
                path_sign(&ab).unwrap(),
                path_sign(&a).unwrap().product(path_sign(&b).unwrap())
            );
        }
    }

    #[test]
    fn reachable_sets_two_edge_chain() {
        let g = SignedGraph::new(
            3,
            vec![(0, 1, Sign::Positive), (1, 2, Sign::Negative)],
        )
        .unwrap();
        let (pos, neg) = g.reachable_sets(0).unwrap();
        assert_eq!(pos, BTreeSet::from([1]));
        assert_eq!(neg, BTreeSet::from([2]));
    }

    #[test]
    fn reachable_sets_balanced_graph() {
        let g = balanced_two_clusters();
        let (pos, neg) = g.reachable_sets(0).unwrap();
        assert_eq!(pos, BTreeSet::from([1, 2]));
        assert_eq!(neg, BTreeSet::from([3, 4, 5, 6]));
    }

    /// Independent oracle: enumerate all shortest paths recursively and
    /// collect their signs.
    fn enumerate_shortest_path_signs(g: &SignedGraph, u: usize) -> (BTreeSet<usize>, BTreeSet<usize>) {
        let dist = g.bfs_distances(u);
        let mut pos = BTreeSet::new();
        let mut neg = BTreeSet::new();
        fn walk(
            g: &SignedGraph,
            dist: &[Option<usize>],
            v: usize,
            negs: usize,
            pos: &mut BTreeSet<usize>,
            neg: &mut BTreeSet<usize>,
        ) {
            let dv = dist[v].unwrap();
            if dv > 0 {
                if negs % 2 == 0 {
                    pos.insert(v);
                } else {
                    neg.insert(v);
                }
            }
            for &(w, s) in g.adjacency(v) {
                if dist[w] == Some(dv + 1) {
                    walk(
                        g,
                        dist,
                        w,
                        negs + usize::from(s == Sign::Negative),
                        pos,
                        neg,
                    );
                }
            }
        }
        walk(g, &dist, u, 0, &mut pos, &mut neg);
        (pos, neg)
    }

    #[test]
    fn reachable_sets_match_path_enumeration_oracle() {
        for seed in 0..30u64 {
            let g = random_graph(10, 0.3, 0.5, seed);
            for u in 0..g.order() {
                let (pos, neg) = g.reachable_sets(u).unwrap();
                let (opos, oneg) = enumerate_shortest_path_signs(&g, u);
                assert_eq!(pos, opos, "seed {seed} vertex {u}");
                assert_eq!(neg, oneg, "seed {seed} vertex {u}");
            }
        }
    }

    #[test]
    fn reachable_sets_stay_in_component_and_exclude_root() {
        for seed in 0..10u64 {
            let g = random_graph(10, 0.2, 0.5, seed);
            for u in 0..g.order() {
                let (pos, neg) = g.reachable_sets(u).unwrap();
                assert!(!pos.contains(&u) && !neg.contains(&u));
                let dist = g.bfs_distances(u);
                for v in pos.union(&neg) {
                    assert!(dist[*v].is_some());
                }
            }
        }
    }

    #[test]
    fn stats_balanced_graph() {
        let s = balanced_two_clusters().stats();
        assert_eq!(s.order, 7);
        assert_eq!(s.size, 10);
        assert_eq!(s.positive_edge_count, 7);
        assert_eq!(s.negative_edge_count, 3);
        assert!((s.density - 10.0 / 21.0).abs() < 1e-12);
        assert!((s.positive_edge_proportion - 70.0).abs() < 1e-12);
    }

    #[test]
    fn stats_empty_graph() {
        let s = SignedGraph::new(0, vec![]).unwrap().stats();
        assert_eq!(s.order, 0);
        assert_eq!(s.size, 0);
        assert_eq!(s.density, 0.0);
        assert_eq!(s.positive_edge_proportion, 0.0);
    }

    #[test]
    fn stats_complete_positive_graph() {
        let mut edges = Vec::new();
        for u in 0..5 {
            for v in (u + 1)..5 {
                edges.push((u, v, Sign::Positive));
            }
        }
        let s = SignedGraph::new(5, edges).unwrap().stats();
        assert_eq!(s.density, 1.0);
        assert_eq!(s.positive_edge_proportion, 100.0);
    }

    #[test]
    fn construction_rejects_bad_edges() {
        assert!(SignedGraph::new(3, vec![(0, 0, Sign::Positive)]).is_err());
        assert!(SignedGraph::new(3, vec![(0, 3, Sign::Positive)]).is_err());
        assert!(SignedGraph::new(
            3,
            vec![(0, 1, Sign::Positive), (1, 0, Sign::Negative)]
        )
        .is_err());
    }
}
