//! Triad-based vertex embedding baseline.
//!
//! Open triads with one positive and one negative edge around a center
//! vertex drive a ranking objective: the center should score higher with
//! its positive neighbor than with its negative one, by a margin. A
//! shared dummy vertex stands in as the negative neighbor for centers
//! whose neighborhoods are all positive; centers with all-negative
//! neighborhoods contribute nothing. Vertex vectors are aggregated by
//! sum or average into the graph vector.
//!
//! The scorer is a pair of small dense towers (one per edge polarity)
//! sharing their first layer. All parameters live in one flat vector so
//! the full-batch gradient can be checked against finite differences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::embed::EmbeddingMatrix;
use crate::error::{Result, SgError};
use crate::graph::{Sign, SignedGraph};
use crate::opt::Adam;
use crate::seeds::derive_seed;

/// Open triad: positive edge (center, positive_neighbor), negative edge
/// (center, negative_neighbor). `None` marks the shared dummy vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triad {
    pub center: usize,
    pub positive_neighbor: usize,
    pub negative_neighbor: Option<usize>,
}

impl Triad {
    pub fn is_dummy(&self) -> bool {
        self.negative_neighbor.is_none()
    }
}

/// All triads of a graph, in deterministic (center, positive, negative)
/// order. Dummy triads come one per positive neighbor of each center
/// with no negative neighbors.
pub fn extract_triads(g: &SignedGraph) -> Vec<Triad> {
    let mut triads = Vec::new();
    for u in 0..g.order() {
        let mut pos: Vec<usize> = Vec::new();
        let mut neg: Vec<usize> = Vec::new();
        for &(v, s) in g.adjacency(u) {
            match s {
                Sign::Positive => pos.push(v),
                Sign::Negative => neg.push(v),
            }
        }
        pos.sort_unstable();
        neg.sort_unstable();
        if pos.is_empty() {
            continue;
        }
        if neg.is_empty() {
            for &p in &pos {
                triads.push(Triad {
                    center: u,
                    positive_neighbor: p,
                    negative_neighbor: None,
                });
            }
        } else {
            for &p in &pos {
                for &n in &neg {
                    triads.push(Triad {
                        center: u,
                        positive_neighbor: p,
                        negative_neighbor: Some(n),
                    });
                }
            }
        }
    }
    triads
}

/// Hyperparameters of the triad model.
#[derive(Debug, Clone)]
pub struct SineConfig {
    pub dim: usize,
    /// Total hidden layers per tower; the first is shared between towers.
    pub layers: usize,
    pub epochs: usize,
    pub margin: f64,
    pub reg: f64,
    pub lr: f64,
    /// Optional cap on triads sampled per center vertex per epoch.
    pub triad_cap: Option<usize>,
}

impl Default for SineConfig {
    fn default() -> SineConfig {
        SineConfig {
            dim: 32,
            layers: 2,
            epochs: 100,
            margin: 1.0,
            reg: 1e-4,
            lr: 0.01,
            triad_cap: None,
        }
    }
}

/// Parameter layout inside the flat vector.
#[derive(Debug, Clone, Copy)]
struct Layout {
    dim: usize,
    layers: usize,
    x: usize,        // (n+1) * dim, dummy vertex last
    w1: usize,       // dim * 2dim
    b1: usize,       // dim
    towers: usize,   // start of tower parameters
    tower_len: usize,
    total: usize,
}

impl Layout {
    fn new(n: usize, dim: usize, layers: usize) -> Layout {
        let x = 0;
        let w1 = x + (n + 1) * dim;
        let b1 = w1 + dim * 2 * dim;
        let towers = b1 + dim;
        // Per tower: (layers - 1) extra hidden layers of (dim*dim + dim),
        // then a scalar head of (dim + 1).
        let tower_len = (layers - 1) * (dim * dim + dim) + dim + 1;
        Layout {
            dim,
            layers,
            x,
            w1,
            b1,
            towers,
            tower_len,
            total: towers + 2 * tower_len,
        }
    }

    fn vertex(&self, v: usize) -> std::ops::Range<usize> {
        let s = self.x + v * self.dim;
        s..s + self.dim
    }

    fn tower(&self, k: usize) -> usize {
        self.towers + k * self.tower_len
    }
}

/// Trained model: the flat parameter vector plus its layout.
#[derive(Debug, Clone)]
pub struct SineModel {
    pub n: usize,
    pub dim: usize,
    pub layers: usize,
    params: Vec<f64>,
    layout: Layout,
    /// Set when training was skipped because no triads existed.
    pub untrained: bool,
    pub epoch_loss: Vec<f64>,
}

impl SineModel {
    pub fn vertex_vector(&self, v: usize) -> &[f64] {
        &self.params[self.layout.vertex(v)]
    }

    pub fn dummy_vector(&self) -> &[f64] {
        &self.params[self.layout.vertex(self.n)]
    }

    /// Tower score of the pair (center, other); tower 0 scores positive
    /// pairs, tower 1 negative pairs.
    pub fn similarity(&self, center: usize, other: Option<usize>, tower: usize) -> f64 {
        let other = other.unwrap_or(self.n);
        forward(&self.params, &self.layout, center, other, tower).sim
    }
}

struct ForwardCache {
    z0: Vec<f64>,
    activations: Vec<Vec<f64>>,
    sim: f64,
}

fn forward(params: &[f64], l: &Layout, center: usize, other: usize, tower: usize) -> ForwardCache {
    let d = l.dim;
    let mut z0 = Vec::with_capacity(2 * d);
    z0.extend_from_slice(&params[l.vertex(center)]);
    z0.extend_from_slice(&params[l.vertex(other)]);

    let mut activations = Vec::with_capacity(l.layers);
    let mut a = vec![0.0; d];
    for i in 0..d {
        let row = &params[l.w1 + i * 2 * d..l.w1 + (i + 1) * 2 * d];
        let h: f64 = row.iter().zip(&z0).map(|(w, z)| w * z).sum::<f64>() + params[l.b1 + i];
        a[i] = h.tanh();
    }
    activations.push(a);

    let base = l.tower(tower);
    for layer in 0..l.layers - 1 {
        let w_off = base + layer * (d * d + d);
        let b_off = w_off + d * d;
        let prev = activations.last().unwrap().clone();
        let mut a = vec![0.0; d];
        for i in 0..d {
            let row = &params[w_off + i * d..w_off + (i + 1) * d];
            let h: f64 = row.iter().zip(&prev).map(|(w, z)| w * z).sum::<f64>() + params[b_off + i];
            a[i] = h.tanh();
        }
        activations.push(a);
    }
    let head = base + (l.layers - 1) * (d * d + d);
    let last = activations.last().unwrap();
    let sim: f64 =
        params[head..head + d].iter().zip(last).map(|(w, z)| w * z).sum::<f64>() + params[head + d];

    ForwardCache { z0, activations, sim }
}

/// Accumulates `upstream * d(sim)/d(params)` into `grad`.
fn backward(
    params: &[f64],
    l: &Layout,
    center: usize,
    other: usize,
    tower: usize,
    cache: &ForwardCache,
    upstream: f64,
    grad: &mut [f64],
) {
    let d = l.dim;
    let base = l.tower(tower);
    let head = base + (l.layers - 1) * (d * d + d);
    let last = cache.activations.last().unwrap();

    grad[head + d] += upstream;
    let mut da = vec![0.0; d];
    for i in 0..d {
        grad[head + i] += upstream * last[i];
        da[i] = upstream * params[head + i];
    }

    for layer in (0..l.layers - 1).rev() {
        let w_off = base + layer * (d * d + d);
        let b_off = w_off + d * d;
        let a = &cache.activations[layer + 1];
        let prev = &cache.activations[layer];
        let mut da_prev = vec![0.0; d];
        for i in 0..d {
            let dh = da[i] * (1.0 - a[i] * a[i]);
            grad[b_off + i] += dh;
            for (j, &p) in prev.iter().enumerate() {
                grad[w_off + i * d + j] += dh * p;
                da_prev[j] += dh * params[w_off + i * d + j];
            }
        }
        da = da_prev;
    }

    // Shared first layer back to the embeddings.
    let a1 = &cache.activations[0];
    let mut dz0 = vec![0.0; 2 * d];
    for i in 0..d {
        let dh = da[i] * (1.0 - a1[i] * a1[i]);
        grad[l.b1 + i] += dh;
        for (j, &z) in cache.z0.iter().enumerate() {
            grad[l.w1 + i * 2 * d + j] += dh * z;
            dz0[j] += dh * params[l.w1 + i * 2 * d + j];
        }
    }
    let cr = l.vertex(center);
    for (g, dz) in grad[cr].iter_mut().zip(&dz0[..d]) {
        *g += dz;
    }
    let or = l.vertex(other);
    for (g, dz) in grad[or].iter_mut().zip(&dz0[d..]) {
        *g += dz;
    }
}

/// Mean hinge loss over the triads plus L2 regularization, with the
/// full gradient. Exposed for the finite-difference check.
pub fn sine_loss_grad(
    params: &[f64],
    n: usize,
    config: &SineConfig,
    triads: &[Triad],
) -> (f64, Vec<f64>) {
    let layout = Layout::new(n, config.dim, config.layers);
    assert_eq!(params.len(), layout.total);
    let mut grad = vec![0.0; layout.total];
    let mut loss = 0.0;
    let scale = 1.0 / triads.len().max(1) as f64;
    for t in triads {
        let neg_vertex = t.negative_neighbor.unwrap_or(n);
        let pos_cache = forward(params, &layout, t.center, t.positive_neighbor, 0);
        let neg_cache = forward(params, &layout, t.center, neg_vertex, 1);
        let hinge = neg_cache.sim + config.margin - pos_cache.sim;
        if hinge > 0.0 {
            loss += scale * hinge;
            backward(
                params,
                &layout,
                t.center,
                t.positive_neighbor,
                0,
                &pos_cache,
                -scale,
                &mut grad,
            );
            backward(params, &layout, t.center, neg_vertex, 1, &neg_cache, scale, &mut grad);
        }
    }
    for (g, &p) in grad.iter_mut().zip(params) {
        *g += config.reg * p;
    }
    loss += 0.5 * config.reg * params.iter().map(|p| p * p).sum::<f64>();
    (loss, grad)
}

/// Length of the flat parameter vector for a graph of the given order.
pub fn param_len(n: usize, config: &SineConfig) -> usize {
    Layout::new(n, config.dim, config.layers).total
}

/// Seeded random parameter vector, as used to start training.
pub fn random_params(n: usize, config: &SineConfig, seed: u64) -> Vec<f64> {
    init_params(&Layout::new(n, config.dim, config.layers), seed)
}

fn init_params(layout: &Layout, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (layout.dim as f64).sqrt();
    (0..layout.total).map(|_| rng.gen_range(-scale..scale)).collect()
}


/// Samples at most `cap` triads per center, deterministically per epoch.
fn cap_triads(triads: &[Triad], cap: usize, seed: u64, epoch: usize) -> Vec<Triad> {
    use rand::seq::SliceRandom;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "triad-cap", &epoch.to_string()));
    let mut out = Vec::new();
    let mut i = 0;
    while i < triads.len() {
        let center = triads[i].center;
        let mut j = i;
        while j < triads.len() && triads[j].center == center {
            j += 1;
        }
        if j - i <= cap {
            out.extend_from_slice(&triads[i..j]);
        } else {
            let mut group: Vec<Triad> = triads[i..j].to_vec();
            group.shuffle(&mut rng);
            group.truncate(cap);
            out.extend(group);
        }
        i = j;
    }
    out
}

/// Trains the model by full-batch Adam on the hinge objective. An empty
/// triad list yields zero vectors with the `untrained` flag set.
pub fn train_sine(g: &SignedGraph, triads: &[Triad], config: &SineConfig, seed: u64) -> SineModel {
    let layout = Layout::new(g.order(), config.dim, config.layers);
    if triads.is_empty() {
        return SineModel {
            n: g.order(),
            dim: config.dim,
            layers: config.layers,
            params: vec![0.0; layout.total],
            layout,
            untrained: true,
            epoch_loss: Vec::new(),
        };
    }
    let mut params = init_params(&layout, seed);
    let mut adam = Adam::new(layout.total, config.lr);
    let mut epoch_loss = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let batch;
        let used: &[Triad] = match config.triad_cap {
            Some(cap) => {
                batch = cap_triads(triads, cap, seed, epoch);
                &batch
            }
            None => triads,
        };
        let (loss, grad) = sine_loss_grad(&params, g.order(), config, used);
        adam.step(&mut params, &grad);
        epoch_loss.push(loss);
    }
    SineModel {
        n: g.order(),
        dim: config.dim,
        layers: config.layers,
        params,
        layout,
        untrained: false,
        epoch_loss,
    }
}

/// Vertex-vector aggregation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregate {
    Sum,
    Average,
}

/// Componentwise sum or mean of all non-dummy vertex vectors.
pub fn aggregate_vertices(model: &SineModel, mode: Aggregate) -> Vec<f64> {
    let mut acc = vec![0.0; model.dim];
    for v in 0..model.n {
        for (a, x) in acc.iter_mut().zip(model.vertex_vector(v)) {
            *a += x;
        }
    }
    if mode == Aggregate::Average && model.n > 0 {
        for a in &mut acc {
            *a /= model.n as f64;
        }
    }
    acc
}

/// Trains one model per graph (in parallel) and aggregates.
pub fn embed_collection_sine(
    graphs: &[SignedGraph],
    ids: &[String],
    config: &SineConfig,
    mode: Aggregate,
    seed: u64,
) -> Result<EmbeddingMatrix> {
    if graphs.is_empty() {
        return Err(SgError::Domain("cannot embed an empty collection".into()));
    }
    if graphs.len() != ids.len() {
        return Err(SgError::Domain(format!(
            "{} graphs but {} ids",
            graphs.len(),
            ids.len()
        )));
    }
    let rows: Vec<Vec<f64>> = graphs
        .par_iter()
        .zip(ids.par_iter())
        .map(|(g, _id)| {
            let triads = extract_triads(g);
            // One shared seed across graphs: all models start from the
            // same vertex-indexed initialization, keeping the aggregated
            // vectors in a comparable basis across the collection.
            let model = train_sine(g, &triads, config, seed);
            aggregate_vertices(&model, mode)
        })
        .collect();
    Ok(EmbeddingMatrix {
        rows,
        dim: config.dim,
        seed,
    })
}
