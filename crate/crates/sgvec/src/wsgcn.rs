//! Signed graph convolution with dual hidden states, extended to
//! whole-graph readout through master nodes.
//!
//! Every vertex carries two hidden vectors. The positive one aggregates
//! the positive vectors of positive neighbors and the negative vectors
//! of negative neighbors; the negative one mirrors this. Sign
//! information thus propagates along paths: a vertex reachable through
//! an odd number of negative edges influences the other polarity.
//!
//! For whole-graph output, master vertices are appended and wired to
//! every base vertex under one of five schemes; the graph vector is the
//! (sum of) master representations after the final layer. Training uses
//! a link-sign objective on the base edges plus sampled non-edges pushed
//! toward a neutral band; master edges take part in message passing but
//! not in the loss.

use ndarray::{s, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::balance::{solve_partition, BalanceMode, Partition};
use crate::embed::EmbeddingMatrix;
use crate::error::{Result, SgError};
use crate::graph::{Sign, SignedGraph};
use crate::opt::Adam;
use crate::seeds::derive_seed;

/// Master-node interconnection scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MasterScheme {
    /// No masters; the graph vector aggregates vertex representations.
    None,
    /// One master, positive edges to every base vertex.
    Plus,
    /// One master, negative edges to every base vertex.
    Minus,
    /// Two masters: one all-positive, one all-negative.
    PlusMinus,
    /// Two masters wired to the minimum-frustration bisection: positive
    /// inside the own cluster, negative to the other.
    Sb,
    /// One master per cluster of the minimum-frustration free-k
    /// partition: positive to its cluster, negative to the rest.
    Gb,
}

impl MasterScheme {
    pub fn name(self) -> &'static str {
        match self {
            MasterScheme::None => "none",
            MasterScheme::Plus => "plus",
            MasterScheme::Minus => "minus",
            MasterScheme::PlusMinus => "plusminus",
            MasterScheme::Sb => "sb",
            MasterScheme::Gb => "gb",
        }
    }
}

/// Base graph with master vertices appended after the base vertices.
#[derive(Debug, Clone)]
pub struct AugmentedGraph {
    pub graph: SignedGraph,
    pub base_order: usize,
    pub scheme: MasterScheme,
    pub partition: Option<Partition>,
    pub partition_frustration: Option<usize>,
    pub partition_exact: Option<bool>,
}

impl AugmentedGraph {
    pub fn master_count(&self) -> usize {
        self.graph.order() - self.base_order
    }

    pub fn masters(&self) -> std::ops::Range<usize> {
        self.base_order..self.graph.order()
    }

    /// Short hex digest of the partition assignment, for the metadata
    /// sidecar; empty when no partition was used.
    pub fn partition_checksum(&self) -> String {
        match &self.partition {
            None => String::new(),
            Some(p) => {
                let mut hasher = Sha256::new();
                for &c in p.assignment() {
                    hasher.update((c as u64).to_le_bytes());
                }
                let digest = hasher.finalize();
                digest[..8].iter().map(|b| format!("{b:02x}")).collect()
            }
        }
    }
}

/// Builds the augmented graph for a scheme. `seed` drives the local
/// search when the balance solver falls back to it.
pub fn attach_master_nodes(
    g: &SignedGraph,
    scheme: MasterScheme,
    seed: u64,
) -> Result<AugmentedGraph> {
    if g.order() == 0 {
        return Err(SgError::Domain("cannot attach master nodes to an empty graph".into()));
    }
    let n = g.order();
    let mut edges: Vec<(usize, usize, Sign)> = g.edges().to_vec();
    let mut partition = None;
    let mut frustration = None;
    let mut exact = None;
    let masters: usize;
    match scheme {
        MasterScheme::None => {
            masters = 0;
        }
        MasterScheme::Plus => {
            masters = 1;
            for v in 0..n {
                edges.push((v, n, Sign::Positive));
            }
        }
        MasterScheme::Minus => {
            masters = 1;
            for v in 0..n {
                edges.push((v, n, Sign::Negative));
            }
        }
        MasterScheme::PlusMinus => {
            masters = 2;
            for v in 0..n {
                edges.push((v, n, Sign::Positive));
                edges.push((v, n + 1, Sign::Negative));
            }
        }
        MasterScheme::Sb | MasterScheme::Gb => {
            let mode = if scheme == MasterScheme::Sb {
                BalanceMode::Bisection
            } else {
                BalanceMode::FreeK
            };
            let (result, was_exact) = solve_partition(g, mode, seed);
            let k = result.partition.cluster_count();
            masters = k;
            for v in 0..n {
                let cv = result.partition.cluster_of(v);
                for m in 0..k {
                    let sign = if cv == m { Sign::Positive } else { Sign::Negative };
                    edges.push((v, n + m, sign));
                }
            }
            frustration = Some(result.frustrated_edge_count);
            partition = Some(result.partition);
            exact = Some(was_exact);
        }
    }
    Ok(AugmentedGraph {
        graph: SignedGraph::new(n + masters, edges)?,
        base_order: n,
        scheme,
        partition,
        partition_frustration: frustration,
        partition_exact: exact,
    })
}

/// Dual hidden states of every layer, base and master vertices together.
#[derive(Debug, Clone)]
pub struct DualHidden {
    pub pos: Vec<Array2<f64>>,
    pub neg: Vec<Array2<f64>>,
}

impl DualHidden {
    pub fn layer_count(&self) -> usize {
        self.pos.len() - 1
    }

    /// Concatenated final representation of one vertex.
    pub fn representation(&self, u: usize) -> Vec<f64> {
        let p = self.pos.last().unwrap().row(u);
        let m = self.neg.last().unwrap().row(u);
        p.iter().chain(m.iter()).copied().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Linear,
}

/// Hyperparameters. The hidden width is constant across layers and the
/// layer-0 features use the same width.
#[derive(Debug, Clone)]
pub struct WsgcnConfig {
    pub dim: usize,
    pub layers: usize,
    pub epochs: usize,
    pub lr: f64,
    /// Non-edge scores are pushed into (−margin, margin).
    pub margin: f64,
    pub activation: Activation,
}

impl Default for WsgcnConfig {
    fn default() -> WsgcnConfig {
        WsgcnConfig {
            dim: 16,
            layers: 2,
            epochs: 60,
            lr: 0.01,
            margin: 0.5,
            activation: Activation::Tanh,
        }
    }
}

/// Layer-0 features: `[k⁺, k⁺/max(1,k), random tail]` for the positive
/// state and the analogue with k⁻ for the negative one. Degrees count
/// master edges. The tail is seeded per vertex index.
pub fn init_features(ag: &AugmentedGraph, dim: usize, seed: u64) -> Result<(Array2<f64>, Array2<f64>)> {
    if dim < 2 {
        return Err(SgError::Config("feature width must be at least 2".into()));
    }
    let g = &ag.graph;
    let n = g.order();
    let mut pos = Array2::zeros((n, dim));
    let mut neg = Array2::zeros((n, dim));
    for u in 0..n {
        let k = g.degree(u) as f64;
        let kp = g.positive_degree(u) as f64;
        let kn = g.negative_degree(u) as f64;
        pos[[u, 0]] = kp;
        pos[[u, 1]] = kp / k.max(1.0);
        neg[[u, 0]] = kn;
        neg[[u, 1]] = kn / k.max(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "feature", &u.to_string()));
        for j in 2..dim {
            pos[[u, j]] = rng.gen_range(-0.5..0.5);
        }
        for j in 2..dim {
            neg[[u, j]] = rng.gen_range(-0.5..0.5);
        }
    }
    Ok((pos, neg))
}

fn neighbor_lists(g: &SignedGraph) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let mut pos = vec![Vec::new(); g.order()];
    let mut neg = vec![Vec::new(); g.order()];
    for u in 0..g.order() {
        for &(v, s) in g.adjacency(u) {
            match s {
                Sign::Positive => pos[u].push(v),
                Sign::Negative => neg[u].push(v),
            }
        }
    }
    (pos, neg)
}

/// Row u of the result is the mean of `h` rows over `nbrs[u]`, zero when
/// the neighborhood is empty.
fn aggregate(h: &Array2<f64>, nbrs: &[Vec<usize>]) -> Array2<f64> {
    let mut out = Array2::zeros(h.raw_dim());
    for (u, list) in nbrs.iter().enumerate() {
        if list.is_empty() {
            continue;
        }
        let inv = 1.0 / list.len() as f64;
        for &v in list {
            let row = h.row(v).to_owned();
            let mut target = out.row_mut(u);
            target.scaled_add(inv, &row);
        }
    }
    out
}

/// Adjoint of [`aggregate`].
fn aggregate_back(d_out: &Array2<f64>, nbrs: &[Vec<usize>], d_h: &mut Array2<f64>) {
    for (u, list) in nbrs.iter().enumerate() {
        if list.is_empty() {
            continue;
        }
        let inv = 1.0 / list.len() as f64;
        let row = d_out.row(u).to_owned();
        for &v in list {
            d_h.row_mut(v).scaled_add(inv, &row);
        }
    }
}

fn apply_activation(x: &mut Array2<f64>, act: Activation) {
    if act == Activation::Tanh {
        x.mapv_inplace(f64::tanh);
    }
}

/// Derivative of the activation expressed through the output value.
fn activation_prime_from_output(h: &Array2<f64>, act: Activation) -> Array2<f64> {
    match act {
        Activation::Tanh => h.mapv(|y| 1.0 - y * y),
        Activation::Linear => Array2::ones(h.raw_dim()),
    }
}

fn layer_inputs(
    hp: &Array2<f64>,
    hm: &Array2<f64>,
    pos_nb: &[Vec<usize>],
    neg_nb: &[Vec<usize>],
) -> (Array2<f64>, Array2<f64>) {
    let agg_pp = aggregate(hp, pos_nb); // positive states of positive neighbors
    let agg_mn = aggregate(hm, neg_nb); // negative states of negative neighbors
    let agg_mp = aggregate(hm, pos_nb); // negative states of positive neighbors
    let agg_pn = aggregate(hp, neg_nb); // positive states of negative neighbors
    let xp = ndarray::concatenate(Axis(1), &[agg_pp.view(), agg_mn.view(), hp.view()]).unwrap();
    let xm = ndarray::concatenate(Axis(1), &[agg_mp.view(), agg_pn.view(), hm.view()]).unwrap();
    (xp, xm)
}

/// Pure forward pass with explicit per-layer weights `(W⁺, W⁻)` of shape
/// `dim × 3·dim`.
pub fn sgcn_forward(
    ag: &AugmentedGraph,
    h0_pos: &Array2<f64>,
    h0_neg: &Array2<f64>,
    weights: &[(Array2<f64>, Array2<f64>)],
    activation: Activation,
) -> Result<DualHidden> {
    let n = ag.graph.order();
    let dim = h0_pos.ncols();
    if h0_pos.nrows() != n || h0_neg.nrows() != n || h0_neg.ncols() != dim {
        return Err(SgError::Domain("feature matrices do not match the graph".into()));
    }
    if weights.is_empty() {
        return Err(SgError::Domain("at least one layer is required".into()));
    }
    for (wp, wm) in weights {
        if wp.nrows() != dim || wp.ncols() != 3 * dim || wm.nrows() != dim || wm.ncols() != 3 * dim
        {
            return Err(SgError::Domain(format!(
                "weight shape {:?}/{:?} does not match width {dim}",
                wp.dim(),
                wm.dim()
            )));
        }
    }
    let (pos_nb, neg_nb) = neighbor_lists(&ag.graph);
    let mut dual = DualHidden {
        pos: vec![h0_pos.clone()],
        neg: vec![h0_neg.clone()],
    };
    for (wp, wm) in weights {
        let hp = dual.pos.last().unwrap();
        let hm = dual.neg.last().unwrap();
        let (xp, xm) = layer_inputs(hp, hm, &pos_nb, &neg_nb);
        let mut new_p = xp.dot(&wp.t());
        let mut new_m = xm.dot(&wm.t());
        apply_activation(&mut new_p, activation);
        apply_activation(&mut new_m, activation);
        dual.pos.push(new_p);
        dual.neg.push(new_m);
    }
    Ok(dual)
}

/// Flat parameter vector: per layer W⁺ then W⁻ (row-major, dim × 3dim),
/// then the bilinear form B (2dim × 2dim).
pub fn param_len(dim: usize, layers: usize) -> usize {
    layers * 2 * (dim * 3 * dim) + 4 * dim * dim
}

fn unpack(params: &[f64], dim: usize, layers: usize) -> (Vec<(Array2<f64>, Array2<f64>)>, Array2<f64>) {
    let w_len = dim * 3 * dim;
    let mut weights = Vec::with_capacity(layers);
    let mut off = 0;
    for _ in 0..layers {
        let wp = Array2::from_shape_vec((dim, 3 * dim), params[off..off + w_len].to_vec()).unwrap();
        off += w_len;
        let wm = Array2::from_shape_vec((dim, 3 * dim), params[off..off + w_len].to_vec()).unwrap();
        off += w_len;
        weights.push((wp, wm));
    }
    let b = Array2::from_shape_vec((2 * dim, 2 * dim), params[off..].to_vec()).unwrap();
    (weights, b)
}

/// Seeded starting parameters: Xavier-range weights, identity bilinear form.
pub fn init_params(dim: usize, layers: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let limit = (6.0 / (4.0 * dim as f64)).sqrt();
    let w_len = layers * 2 * dim * 3 * dim;
    let mut params: Vec<f64> = (0..w_len).map(|_| rng.gen_range(-limit..limit)).collect();
    // B starts at the identity so the score begins as a plain dot product.
    let mut b = vec![0.0; 4 * dim * dim];
    for i in 0..2 * dim {
        b[i * 2 * dim + i] = 1.0;
    }
    params.extend(b);
    params
}

/// Link-sign loss over base edges plus neutral-band loss over the given
/// non-edges, with the full analytic gradient.
pub fn wsgcn_loss_grad(
    params: &[f64],
    ag: &AugmentedGraph,
    h0_pos: &Array2<f64>,
    h0_neg: &Array2<f64>,
    config: &WsgcnConfig,
    nonedges: &[(usize, usize)],
) -> (f64, Vec<f64>) {
    let dim = config.dim;
    let layers = config.layers;
    assert_eq!(params.len(), param_len(dim, layers));
    let (weights, bform) = unpack(params, dim, layers);
    let (pos_nb, neg_nb) = neighbor_lists(&ag.graph);

    // Forward with caches.
    let n = ag.graph.order();
    let mut hps = vec![h0_pos.clone()];
    let mut hms = vec![h0_neg.clone()];
    let mut xps = Vec::with_capacity(layers);
    let mut xms = Vec::with_capacity(layers);
    for (wp, wm) in &weights {
        let (xp, xm) = layer_inputs(hps.last().unwrap(), hms.last().unwrap(), &pos_nb, &neg_nb);
        let mut new_p = xp.dot(&wp.t());
        let mut new_m = xm.dot(&wm.t());
        apply_activation(&mut new_p, config.activation);
        apply_activation(&mut new_m, config.activation);
        xps.push(xp);
        xms.push(xm);
        hps.push(new_p);
        hms.push(new_m);
    }
    let z = ndarray::concatenate(
        Axis(1),
        &[hps.last().unwrap().view(), hms.last().unwrap().view()],
    )
    .unwrap();

    let softplus = |x: f64| if x > 0.0 { x + (-x).exp().ln_1p() } else { x.exp().ln_1p() };
    let sigmoid = |x: f64| 1.0 / (1.0 + (-x).exp());

    let base_edges = ag.graph.edges().iter().filter(|&&(u, v, _)| u < ag.base_order && v < ag.base_order);
    let edge_terms: Vec<(usize, usize, f64)> = base_edges
        .map(|&(u, v, s)| (u, v, if s == Sign::Positive { 1.0 } else { -1.0 }))
        .collect();
    let total_terms = (edge_terms.len() + nonedges.len()).max(1) as f64;
    let scale = 1.0 / total_terms;

    let mut loss = 0.0;
    let mut d_z = Array2::<f64>::zeros(z.raw_dim());
    let mut d_b = Array2::<f64>::zeros(bform.raw_dim());
    let mut score_and_grad = |u: usize, v: usize, coeff_fn: &dyn Fn(f64) -> (f64, f64)| {
        let zu = z.row(u).to_owned();
        let zv = z.row(v).to_owned();
        let bzv = bform.dot(&zv);
        let score = zu.dot(&bzv);
        let (l, dscore) = coeff_fn(score);
        loss += scale * l;
        let c = scale * dscore;
        d_z.row_mut(u).scaled_add(c, &bzv);
        let btzu = bform.t().dot(&zu);
        d_z.row_mut(v).scaled_add(c, &btzu);
        for i in 0..bform.nrows() {
            for j in 0..bform.ncols() {
                d_b[[i, j]] += c * zu[i] * zv[j];
            }
        }
    };
    for &(u, v, y) in &edge_terms {
        score_and_grad(u, v, &|s| (softplus(-y * s), -y * sigmoid(-y * s)));
    }
    let margin = config.margin;
    for &(u, v) in nonedges {
        score_and_grad(u, v, &|s| {
            (
                softplus(s - margin) + softplus(-s - margin),
                sigmoid(s - margin) - sigmoid(-s - margin),
            )
        });
    }

    // Backward through the layers.
    let mut d_hp = d_z.slice(s![.., ..dim]).to_owned();
    let mut d_hm = d_z.slice(s![.., dim..]).to_owned();
    let mut grad = vec![0.0; params.len()];
    let w_len = dim * 3 * dim;
    for t in (0..layers).rev() {
        let (wp, wm) = &weights[t];
        let hp = &hps[t + 1];
        let hm = &hms[t + 1];
        let ds_p = &d_hp * &activation_prime_from_output(hp, config.activation);
        let ds_m = &d_hm * &activation_prime_from_output(hm, config.activation);
        let d_wp = ds_p.t().dot(&xps[t]);
        let d_wm = ds_m.t().dot(&xms[t]);
        let off = t * 2 * w_len;
        for (g, v) in grad[off..off + w_len].iter_mut().zip(d_wp.iter()) {
            *g += v;
        }
        for (g, v) in grad[off + w_len..off + 2 * w_len].iter_mut().zip(d_wm.iter()) {
            *g += v;
        }
        let d_xp = ds_p.dot(wp);
        let d_xm = ds_m.dot(wm);
        let mut new_d_hp = Array2::<f64>::zeros((n, dim));
        let mut new_d_hm = Array2::<f64>::zeros((n, dim));
        // X⁺ = [agg⁺(H⁺), agg⁻(H⁻), H⁺]
        aggregate_back(&d_xp.slice(s![.., ..dim]).to_owned(), &pos_nb, &mut new_d_hp);
        aggregate_back(&d_xp.slice(s![.., dim..2 * dim]).to_owned(), &neg_nb, &mut new_d_hm);
        new_d_hp += &d_xp.slice(s![.., 2 * dim..]);
        // X⁻ = [agg⁺(H⁻), agg⁻(H⁺), H⁻]
        aggregate_back(&d_xm.slice(s![.., ..dim]).to_owned(), &pos_nb, &mut new_d_hm);
        aggregate_back(&d_xm.slice(s![.., dim..2 * dim]).to_owned(), &neg_nb, &mut new_d_hp);
        new_d_hm += &d_xm.slice(s![.., 2 * dim..]);
        d_hp = new_d_hp;
        d_hm = new_d_hm;
    }
    let b_off = layers * 2 * w_len;
    for (g, v) in grad[b_off..].iter_mut().zip(d_b.iter()) {
        *g += v;
    }
    (loss, grad)
}

/// Samples `count` distinct base-vertex pairs that are not edges.
fn sample_nonedges(g: &SignedGraph, base_order: usize, count: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut seen = std::collections::HashSet::new();
    if base_order < 2 {
        return out;
    }
    let mut attempts = 0usize;
    let max_attempts = count.saturating_mul(50).max(1000);
    while out.len() < count && attempts < max_attempts {
        attempts += 1;
        let u = rng.gen_range(0..base_order);
        let v = rng.gen_range(0..base_order);
        if u == v {
            continue;
        }
        let (a, b) = (u.min(v), u.max(v));
        if g.edge_sign(a, b).is_some() || !seen.insert((a, b)) {
            continue;
        }
        out.push((a, b));
    }
    out
}

/// Trained model: weights, the final dual states, and the loss curve.
#[derive(Debug, Clone)]
pub struct WsgcnModel {
    pub config: WsgcnConfig,
    pub params: Vec<f64>,
    pub dual: DualHidden,
    pub epoch_loss: Vec<f64>,
}

impl WsgcnModel {
    /// Sign-prediction accuracy on the base edges.
    pub fn edge_sign_accuracy(&self, ag: &AugmentedGraph) -> f64 {
        let (_, bform) = unpack(&self.params, self.config.dim, self.config.layers);
        let mut correct = 0usize;
        let mut total = 0usize;
        for &(u, v, sgn) in ag.graph.edges() {
            if u >= ag.base_order || v >= ag.base_order {
                continue;
            }
            let zu = ndarray::Array1::from(self.dual.representation(u));
            let zv = ndarray::Array1::from(self.dual.representation(v));
            let score = zu.dot(&bform.dot(&zv));
            let predicted_positive = score > 0.0;
            if predicted_positive == (sgn == Sign::Positive) {
                correct += 1;
            }
            total += 1;
        }
        if total == 0 {
            return 0.0;
        }
        correct as f64 / total as f64
    }
}

/// Full-batch Adam on the link-sign objective. Non-edges are resampled
/// each epoch from a seeded stream, 1:1 with the base edge count.
pub fn train_wsgcn(ag: &AugmentedGraph, config: &WsgcnConfig, seed: u64) -> Result<WsgcnModel> {
    let base_edge_count = ag
        .graph
        .edges()
        .iter()
        .filter(|&&(u, v, _)| u < ag.base_order && v < ag.base_order)
        .count();
    if base_edge_count == 0 {
        return Err(SgError::Domain("training needs at least one base edge".into()));
    }
    let (h0_pos, h0_neg) = init_features(ag, config.dim, derive_seed(seed, "wsgcn-feat", ""))?;
    let mut params = init_params(config.dim, config.layers, derive_seed(seed, "wsgcn-init", ""));
    let mut adam = Adam::new(params.len(), config.lr);
    let mut epoch_loss = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let nonedges = sample_nonedges(
            &ag.graph,
            ag.base_order,
            base_edge_count,
            derive_seed(seed, "wsgcn-nonedge", &epoch.to_string()),
        );
        let (loss, grad) = wsgcn_loss_grad(&params, ag, &h0_pos, &h0_neg, config, &nonedges);
        adam.step(&mut params, &grad);
        epoch_loss.push(loss);
    }
    let (weights, _) = unpack(&params, config.dim, config.layers);
    let dual = sgcn_forward(ag, &h0_pos, &h0_neg, &weights, config.activation)?;
    Ok(WsgcnModel {
        config: config.clone(),
        params,
        dual,
        epoch_loss,
    })
}

/// Which layers feed the readout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReprMode {
    LastLayer,
    SumLayers,
}

/// Aggregate for the no-master scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexAggregate {
    Sum,
    Average,
}

fn vertex_repr(dual: &DualHidden, u: usize, mode: ReprMode) -> Vec<f64> {
    match mode {
        ReprMode::LastLayer => dual.representation(u),
        ReprMode::SumLayers => {
            let dim = dual.pos[0].ncols();
            let mut acc = vec![0.0; 2 * dim];
            for t in 1..dual.pos.len() {
                for j in 0..dim {
                    acc[j] += dual.pos[t][[u, j]];
                    acc[dim + j] += dual.neg[t][[u, j]];
                }
            }
            acc
        }
    }
}

/// Whole-graph vector: the (sum of) master representations, or for the
/// no-master scheme the vertex aggregate.
pub fn graph_representation(
    ag: &AugmentedGraph,
    dual: &DualHidden,
    mode: ReprMode,
    fallback: VertexAggregate,
) -> Vec<f64> {
    if ag.scheme == MasterScheme::None {
        let dim2 = 2 * dual.pos[0].ncols();
        let mut acc = vec![0.0; dim2];
        for u in 0..ag.base_order {
            for (a, x) in acc.iter_mut().zip(vertex_repr(dual, u, mode)) {
                *a += x;
            }
        }
        if fallback == VertexAggregate::Average && ag.base_order > 0 {
            for a in &mut acc {
                *a /= ag.base_order as f64;
            }
        }
        return acc;
    }
    let dim2 = 2 * dual.pos[0].ncols();
    let mut acc = vec![0.0; dim2];
    for m in ag.masters() {
        for (a, x) in acc.iter_mut().zip(vertex_repr(dual, m, mode)) {
            *a += x;
        }
    }
    acc
}

/// Per-graph metadata recorded alongside the embedding.
#[derive(Debug, Clone)]
pub struct WsgcnMeta {
    pub id: String,
    pub scheme: MasterScheme,
    pub master_count: usize,
    pub partition_checksum: String,
    pub frustration: Option<usize>,
}

/// Trains one model per graph in parallel and reads out graph vectors.
#[allow(clippy::too_many_arguments)]
pub fn embed_collection_wsgcn(
    graphs: &[SignedGraph],
    ids: &[String],
    scheme: MasterScheme,
    config: &WsgcnConfig,
    mode: ReprMode,
    fallback: VertexAggregate,
    seed: u64,
) -> Result<(EmbeddingMatrix, Vec<WsgcnMeta>)> {
    if graphs.is_empty() {
        return Err(SgError::Domain("cannot embed an empty collection".into()));
    }
    if graphs.len() != ids.len() {
        return Err(SgError::Domain(format!("{} graphs but {} ids", graphs.len(), ids.len())));
    }
    let results: Vec<Result<(Vec<f64>, WsgcnMeta)>> = graphs
        .par_iter()
        .zip(ids.par_iter())
        .map(|(g, id)| {
            let graph_seed = derive_seed(seed, "wsgcn", id);
            let ag = attach_master_nodes(g, scheme, graph_seed)?;
            // Shared training seed: every graph starts from the same
            // weight and feature initialization, so the learned
            // representations live in a comparable basis across the
            // collection (a per-graph random basis would turn the
            // embedding matrix into noise for any downstream classifier).
            let model = train_wsgcn(&ag, config, seed)?;
            let row = graph_representation(&ag, &model.dual, mode, fallback);
            let meta = WsgcnMeta {
                id: id.clone(),
                scheme,
                master_count: ag.master_count(),
                partition_checksum: ag.partition_checksum(),
                frustration: ag.partition_frustration,
            };
            Ok((row, meta))
        })
        .collect();
    let mut rows = Vec::with_capacity(graphs.len());
    let mut metas = Vec::with_capacity(graphs.len());
    for r in results {
        let (row, meta) = r?;
        rows.push(row);
        metas.push(meta);
    }
    Ok((
        EmbeddingMatrix {
            rows,
            dim: 2 * config.dim,
            seed,
        },
        metas,
    ))
}
