//! Whole-graph embeddings from label documents.
//!
//! Each graph becomes a document whose words are its rooted-subgraph
//! labels from all relabeling iterations (iteration 0 included by
//! default). Document vectors are trained PV-DBOW style against frozen,
//! seed-derived token vectors with logistic negative-sampling loss.
//!
//! Freezing the token vectors keeps every document's objective convex
//! and independent of the rest of the collection, which gives the two
//! headline guarantees: reordering the collection permutes embedding
//! rows exactly, and relabeling vertices inside a graph leaves its
//! vector bit-identical.

use std::collections::HashMap;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Result, SgError};
use crate::graph::SignedGraph;
use crate::seeds::derive_seed;
use crate::wl::{relabel_collection, LabelDictionary, WlVariant};

/// Graph collection rendered as documents of label tokens.
#[derive(Debug, Clone)]
pub struct Corpus {
    /// Sorted unique label ids; a token id is an index into this list.
    pub vocabulary: Vec<u64>,
    /// Per graph, token ids sorted ascending (canonical order).
    pub documents: Vec<Vec<u32>>,
    /// Collection-wide occurrence count per token id.
    pub counts: Vec<u64>,
    pub variant: WlVariant,
    pub iterations: usize,
}

/// One trained vector per graph.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub rows: Vec<Vec<f64>>,
    pub dim: usize,
    pub seed: u64,
}

/// PV-DBOW hyperparameters.
#[derive(Debug, Clone)]
pub struct PvdbowConfig {
    pub dim: usize,
    pub epochs: usize,
    pub negatives: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    /// Include iteration-0 labels as tokens (on by default).
    pub include_initial: bool,
    /// Tokens with corpus frequency below this are skipped during
    /// training (they stay in the corpus and the negative table). 1
    /// keeps everything, mirroring the usual doc2vec knob.
    pub min_count: u64,
}

impl Default for PvdbowConfig {
    fn default() -> PvdbowConfig {
        PvdbowConfig {
            dim: 128,
            epochs: 50,
            negatives: 5,
            lr_start: 0.025,
            lr_end: 0.0001,
            include_initial: true,
            min_count: 1,
        }
    }
}

/// Runs the relabeling pipeline over the collection (shared dictionary,
/// canonical id assignment) and emits the per-iteration vertex labels as
/// document tokens. For the dual variant the fused labels are used.
pub fn build_corpus(
    graphs: &[SignedGraph],
    variant: WlVariant,
    iterations: usize,
    include_initial: bool,
) -> Result<Corpus> {
    if graphs.is_empty() {
        return Err(SgError::Domain("cannot build a corpus from an empty collection".into()));
    }
    if iterations < 1 {
        return Err(SgError::Domain("relabeling depth must be at least 1".into()));
    }
    let mut dict = LabelDictionary::new();
    let traces = relabel_collection(graphs, variant, iterations, &mut dict, true);

    let mut label_docs: Vec<Vec<u64>> = Vec::with_capacity(graphs.len());
    for trace in &traces {
        let start = if include_initial { 0 } else { 1 };
        let mut doc: Vec<u64> = trace.labels[start..].iter().flatten().copied().collect();
        doc.sort_unstable();
        label_docs.push(doc);
    }

    let mut vocabulary: Vec<u64> = label_docs.iter().flatten().copied().collect();
    vocabulary.sort_unstable();
    vocabulary.dedup();
    let index: HashMap<u64, u32> = vocabulary
        .iter()
        .enumerate()
        .map(|(i, &l)| (l, i as u32))
        .collect();

    let mut counts = vec![0u64; vocabulary.len()];
    let documents: Vec<Vec<u32>> = label_docs
        .iter()
        .map(|doc| {
            doc.iter()
                .map(|l| {
                    let t = index[l];
                    counts[t as usize] += 1;
                    t
                })
                .collect()
        })
        .collect();

    Ok(Corpus {
        vocabulary,
        documents,
        counts,
        variant,
        iterations,
    })
}

fn uniform_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let half = 0.5 / dim as f64;
    (0..dim).map(|_| rng.gen_range(-half..half)).collect()
}

fn softplus(x: f64) -> f64 {
    // Numerically stable log(1 + e^x).
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Logistic negative-sampling loss and its gradient with respect to the
/// document vector: `softplus(-doc·pos) + Σ softplus(doc·neg)`.
pub fn pvdbow_loss_grad(doc: &[f64], pos: &[f64], negs: &[&[f64]]) -> (f64, Vec<f64>) {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let xp = dot(doc, pos);
    let mut loss = softplus(-xp);
    let mut grad = vec![0.0; doc.len()];
    let gp = -sigmoid(-xp);
    for (g, &p) in grad.iter_mut().zip(pos) {
        *g += gp * p;
    }
    for &neg in negs {
        let xn = dot(doc, neg);
        loss += softplus(xn);
        let gn = sigmoid(xn);
        for (g, &c) in grad.iter_mut().zip(neg) {
            *g += gn * c;
        }
    }
    (loss, grad)
}

/// Cumulative sampling table over the unigram distribution raised to 3/4.
struct NegativeTable {
    cumulative: Vec<f64>,
    total: f64,
}

impl NegativeTable {
    fn new(counts: &[u64]) -> NegativeTable {
        let mut cumulative = Vec::with_capacity(counts.len());
        let mut total = 0.0;
        for &c in counts {
            total += (c as f64).powf(0.75);
            cumulative.push(total);
        }
        NegativeTable { cumulative, total }
    }

    fn sample(&self, rng: &mut ChaCha8Rng, exclude: u32) -> u32 {
        for _ in 0..16 {
            let x = rng.gen::<f64>() * self.total;
            let idx = self.cumulative.partition_point(|&c| c <= x) as u32;
            let idx = idx.min(self.cumulative.len() as u32 - 1);
            if idx != exclude {
                return idx;
            }
        }
        // Pathologically concentrated distribution: fall back to the
        // neighbor token.
        if exclude as usize + 1 < self.cumulative.len() {
            exclude + 1
        } else {
            exclude - 1
        }
    }
}

/// Trains one document vector against the frozen token matrix. Returns
/// the vector and its per-epoch mean loss.
fn train_document(
    doc: &[u32],
    tokens: &[Vec<f64>],
    counts: &[u64],
    table: &NegativeTable,
    config: &PvdbowConfig,
    doc_seed: u64,
) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(doc_seed);
    let mut v = uniform_vector(&mut rng, config.dim);
    // Frequency filter; if it would drop everything, train on the full
    // document rather than leaving the vector at its random start.
    let doc: Vec<u32> = if config.min_count > 1 {
        let kept: Vec<u32> = doc
            .iter()
            .copied()
            .filter(|&t| counts[t as usize] >= config.min_count)
            .collect();
        if kept.is_empty() { doc.to_vec() } else { kept }
    } else {
        doc.to_vec()
    };
    if doc.is_empty() {
        return (v, vec![0.0; config.epochs]);
    }
    let total_steps = (config.epochs * doc.len()) as f64;
    let mut step = 0.0;
    let mut epoch_loss = Vec::with_capacity(config.epochs);
    let mut negs: Vec<&[f64]> = Vec::with_capacity(config.negatives);
    for _ in 0..config.epochs {
        let mut loss_sum = 0.0;
        for &t in &doc {
            let lr = config.lr_start + (config.lr_end - config.lr_start) * step / total_steps;
            negs.clear();
            for _ in 0..config.negatives {
                let n = table.sample(&mut rng, t);
                negs.push(&tokens[n as usize]);
            }
            let (loss, grad) = pvdbow_loss_grad(&v, &tokens[t as usize], &negs);
            loss_sum += loss;
            for (vi, gi) in v.iter_mut().zip(&grad) {
                *vi -= lr * gi;
            }
            step += 1.0;
        }
        epoch_loss.push(loss_sum / doc.len() as f64);
    }
    (v, epoch_loss)
}

/// Trains all document vectors. Token vectors are frozen at their
/// seed-derived initialization (keyed by label id, not position), so
/// documents are independent and processed in parallel with a
/// deterministic result. Returns the matrix and the mean epoch loss
/// across documents.
pub fn train_pvdbow(
    corpus: &Corpus,
    ids: &[String],
    config: &PvdbowConfig,
    seed: u64,
) -> Result<(EmbeddingMatrix, Vec<f64>)> {
    if corpus.documents.len() != ids.len() {
        return Err(SgError::Domain(format!(
            "{} documents but {} graph ids",
            corpus.documents.len(),
            ids.len()
        )));
    }
    if config.dim < 1 || config.epochs < 1 {
        return Err(SgError::Config("dim and epochs must be at least 1".into()));
    }
    if corpus.vocabulary.len() < config.negatives + 1 {
        return Err(SgError::Domain(format!(
            "vocabulary of {} tokens cannot support {} negative samples",
            corpus.vocabulary.len(),
            config.negatives
        )));
    }

    let tokens: Vec<Vec<f64>> = corpus
        .vocabulary
        .iter()
        .map(|label| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(seed, "pvdbow-token", &label.to_string()));
            // Frozen tokens use unit-range entries; the tiny 0.5/d scale
            // is only needed when token vectors are themselves trained.
            (0..config.dim).map(|_| rng.gen_range(-0.5..0.5)).collect()
        })
        .collect();
    let table = NegativeTable::new(&corpus.counts);

    let results: Vec<(Vec<f64>, Vec<f64>)> = corpus
        .documents
        .par_iter()
        .zip(ids.par_iter())
        .map(|(doc, id)| {
            train_document(
                doc,
                &tokens,
                &corpus.counts,
                &table,
                config,
                derive_seed(seed, "pvdbow-doc", id),
            )
        })
        .collect();

    let mut epoch_loss = vec![0.0; config.epochs];
    for (_, losses) in &results {
        for (acc, l) in epoch_loss.iter_mut().zip(losses) {
            *acc += l;
        }
    }
    for l in &mut epoch_loss {
        *l /= results.len() as f64;
    }

    let rows = results.into_iter().map(|(v, _)| v).collect();
    Ok((
        EmbeddingMatrix {
            rows,
            dim: config.dim,
            seed,
        },
        epoch_loss,
    ))
}

/// `build_corpus` followed by `train_pvdbow`.
pub fn embed_collection(
    graphs: &[SignedGraph],
    ids: &[String],
    variant: WlVariant,
    iterations: usize,
    config: &PvdbowConfig,
    seed: u64,
) -> Result<(EmbeddingMatrix, Vec<f64>)> {
    let corpus = build_corpus(graphs, variant, iterations, config.include_initial)?;
    train_pvdbow(&corpus, ids, config, seed)
}

/// Writes an embedding file: optional `#` comment lines, a header
/// `n_graphs d seed`, then one `graph-id v1 … vd` line per graph. All
/// method families share this format.
pub fn write_embeddings(
    path: &Path,
    ids: &[String],
    matrix: &EmbeddingMatrix,
    comments: &[String],
) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    writeln!(w, "{} {} {}", matrix.rows.len(), matrix.dim, matrix.seed)?;
    for (id, row) in ids.iter().zip(&matrix.rows) {
        write!(w, "{id}")?;
        for x in row {
            write!(w, " {x}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an embedding file written by [`write_embeddings`].
pub fn read_embeddings(path: &Path) -> Result<(Vec<String>, EmbeddingMatrix)> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut lines = reader
        .lines()
        .collect::<std::io::Result<Vec<String>>>()?
        .into_iter()
        .filter(|l| !l.trim_start().starts_with('#') && !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| SgError::Data("embedding file has no header".into()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(SgError::Data(format!("malformed embedding header: {header:?}")));
    }
    let n: usize = parts[0]
        .parse()
        .map_err(|_| SgError::Data(format!("bad graph count: {:?}", parts[0])))?;
    let dim: usize = parts[1]
        .parse()
        .map_err(|_| SgError::Data(format!("bad dimension: {:?}", parts[1])))?;
    let seed: u64 = parts[2]
        .parse()
        .map_err(|_| SgError::Data(format!("bad seed: {:?}", parts[2])))?;

    let mut ids = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n);
    for line in lines {
        let mut fields = line.split_whitespace();
        let id = fields
            .next()
            .ok_or_else(|| SgError::Data("empty embedding row".into()))?
            .to_string();
        let row: Vec<f64> = fields
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| SgError::Data(format!("bad float {f:?} in row for {id}")))
            })
            .collect::<Result<_>>()?;
        if row.len() != dim {
            return Err(SgError::Data(format!(
                "row for {id} has {} values, expected {dim}",
                row.len()
            )));
        }
        ids.push(id);
        rows.push(row);
    }
    if rows.len() != n {
        return Err(SgError::Data(format!(
            "embedding file declares {n} graphs but contains {}",
            rows.len()
        )));
    }
    Ok((ids, EmbeddingMatrix { rows, dim, seed }))
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}
