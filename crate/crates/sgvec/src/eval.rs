//! Classification harness: stratified k-fold cross-validation over graph
//! embeddings with a one-vs-rest linear max-margin classifier, scored by
//! macro-averaged precision/recall/F (reported as percentages).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::embed::EmbeddingMatrix;
use crate::error::{Result, SgError};
use crate::seeds::derive_seed;

/// Embeddings paired with class labels.
#[derive(Debug, Clone)]
pub struct LabeledEmbeddings {
    pub matrix: EmbeddingMatrix,
    pub labels: Vec<usize>,
    pub classes: usize,
}

impl LabeledEmbeddings {
    pub fn new(matrix: EmbeddingMatrix, labels: Vec<usize>) -> Result<LabeledEmbeddings> {
        if matrix.rows.len() != labels.len() {
            return Err(SgError::Domain(format!(
                "{} embedding rows but {} labels",
                matrix.rows.len(),
                labels.len()
            )));
        }
        let classes = labels.iter().max().map_or(0, |m| m + 1);
        for c in 0..classes {
            if !labels.contains(&c) {
                return Err(SgError::Domain(format!("class {c} has no members")));
            }
        }
        Ok(LabeledEmbeddings {
            matrix,
            labels,
            classes,
        })
    }
}

/// Per-class and aggregate scores; all headline values are percentages.
#[derive(Debug, Clone)]
pub struct ScoreReport {
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f: f64,
    pub accuracy: f64,
    /// Per class: (precision, recall, f) as percentages.
    pub per_class: Vec<(f64, f64, f64)>,
    /// Per fold: (macro precision, macro recall, macro f), empty when
    /// scoring a single prediction set.
    pub per_fold: Vec<(f64, f64, f64)>,
}

/// Fold indices per item.
#[derive(Debug, Clone)]
pub struct FoldAssignment {
    pub folds: Vec<usize>,
    pub k: usize,
    /// True when k was reduced to the smallest class size.
    pub reduced: bool,
}

/// Stratified fold assignment: per-class round-robin after a seeded
/// shuffle, so per-class counts across folds differ by at most one.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(SgError::Domain("cross-validation needs at least 2 folds".into()));
    }
    if labels.is_empty() {
        return Err(SgError::Domain("cannot fold an empty label set".into()));
    }
    let classes = labels.iter().max().unwrap() + 1;
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (i, &c) in labels.iter().enumerate() {
        by_class[c].push(i);
    }
    let min_class = by_class.iter().map(Vec::len).filter(|&l| l > 0).min().unwrap();
    let used_k = k.min(min_class);
    if used_k < 2 {
        return Err(SgError::Domain(format!(
            "smallest class has {min_class} members; at least 2 are needed per fold"
        )));
    }
    let reduced = used_k < k;
    if reduced {
        eprintln!("warning: reducing folds from {k} to {used_k} (smallest class has {min_class} members)");
    }
    let mut folds = vec![0usize; labels.len()];
    for (c, members) in by_class.iter().enumerate() {
        let mut members = members.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "fold", &c.to_string()));
        members.shuffle(&mut rng);
        for (i, &idx) in members.iter().enumerate() {
            folds[idx] = i % used_k;
        }
    }
    Ok(FoldAssignment {
        folds,
        k: used_k,
        reduced,
    })
}

/// One-vs-rest linear classifier with per-feature standardization.
#[derive(Debug, Clone)]
pub struct LinearModel {
    /// One weight vector (last entry = bias) per class.
    weights: Vec<Vec<f64>>,
    mean: Vec<f64>,
    std: Vec<f64>,
}

fn standardize_stats(rows: &[&[f64]]) -> (Vec<f64>, Vec<f64>) {
    let d = rows[0].len();
    let n = rows.len() as f64;
    let mut mean = vec![0.0; d];
    for row in rows {
        for (m, x) in mean.iter_mut().zip(*row) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut var = vec![0.0; d];
    for row in rows {
        for j in 0..d {
            let dlt = row[j] - mean[j];
            var[j] += dlt * dlt;
        }
    }
    let std = var
        .iter()
        .map(|v| {
            let s = (v / n).sqrt();
            if s < 1e-12 {
                1.0
            } else {
                s
            }
        })
        .collect();
    (mean, std)
}

/// Full-batch subgradient descent on the hinge objective
/// `λ/2·‖w‖² + mean hinge`, with λ = 1/(C·m) and step 1/(λ·t); the bias
/// is unregularized.
fn train_binary_hinge(x: &[Vec<f64>], y: &[f64], c: f64, iterations: usize) -> Vec<f64> {
    let d = x[0].len();
    let m = x.len() as f64;
    let lambda = 1.0 / (c * m);
    let mut w = vec![0.0; d + 1];
    for t in 1..=iterations {
        let mut grad = vec![0.0; d + 1];
        for j in 0..d {
            grad[j] = lambda * w[j];
        }
        for (xi, &yi) in x.iter().zip(y) {
            let score: f64 = xi.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + w[d];
            if yi * score < 1.0 {
                for j in 0..d {
                    grad[j] -= yi * xi[j] / m;
                }
                grad[d] -= yi / m;
            }
        }
        let eta = 1.0 / (lambda * t as f64);
        // Cap the step so early iterations with tiny λ stay stable.
        let eta = eta.min(1.0);
        for j in 0..=d {
            w[j] -= eta * grad[j];
        }
    }
    w
}

const SVM_ITERATIONS: usize = 300;

/// Trains a one-vs-rest linear max-margin classifier.
pub fn train_linear_classifier(
    rows: &[&[f64]],
    labels: &[usize],
    classes: usize,
    c: f64,
) -> Result<LinearModel> {
    if rows.len() != labels.len() || rows.is_empty() {
        return Err(SgError::Domain("training rows and labels must match and be non-empty".into()));
    }
    let distinct: std::collections::HashSet<usize> = labels.iter().copied().collect();
    if distinct.len() < 2 {
        return Err(SgError::Domain("training fold contains a single class".into()));
    }
    let (mean, std) = standardize_stats(rows);
    let x: Vec<Vec<f64>> = rows
        .iter()
        .map(|row| {
            row.iter()
                .zip(mean.iter().zip(&std))
                .map(|(v, (m, s))| (v - m) / s)
                .collect()
        })
        .collect();
    let weights: Vec<Vec<f64>> = (0..classes)
        .map(|cls| {
            let y: Vec<f64> = labels
                .iter()
                .map(|&l| if l == cls { 1.0 } else { -1.0 })
                .collect();
            train_binary_hinge(&x, &y, c, SVM_ITERATIONS)
        })
        .collect();
    Ok(LinearModel { weights, mean, std })
}

impl LinearModel {
    /// Predicted class: argmax of the per-class scores, ties toward the
    /// lower class id.
    pub fn predict(&self, row: &[f64]) -> usize {
        let d = self.mean.len();
        let x: Vec<f64> = row
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect();
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (cls, w) in self.weights.iter().enumerate() {
            let score: f64 = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + w[d];
            if score > best_score {
                best_score = score;
                best = cls;
            }
        }
        best
    }
}

/// Per-class precision/recall/F and unweighted macro means, as
/// percentages. Zero denominators score 0.
pub fn macro_scores(predictions: &[usize], truth: &[usize]) -> ScoreReport {
    assert_eq!(predictions.len(), truth.len());
    let classes = truth
        .iter()
        .chain(predictions)
        .max()
        .map_or(0, |m| m + 1);
    let mut tp = vec![0usize; classes];
    let mut fp = vec![0usize; classes];
    let mut fnn = vec![0usize; classes];
    let mut correct = 0usize;
    for (&p, &t) in predictions.iter().zip(truth) {
        if p == t {
            tp[t] += 1;
            correct += 1;
        } else {
            fp[p] += 1;
            fnn[t] += 1;
        }
    }
    // Score over classes present in the truth (a stray prediction of an
    // absent class still costs precision on real classes via fp above).
    let present: Vec<usize> = (0..classes).filter(|&c| truth.contains(&c)).collect();
    let mut per_class = Vec::with_capacity(classes);
    let (mut sp, mut sr, mut sf) = (0.0, 0.0, 0.0);
    for c in 0..classes {
        let p = if tp[c] + fp[c] == 0 {
            0.0
        } else {
            tp[c] as f64 / (tp[c] + fp[c]) as f64
        };
        let r = if tp[c] + fnn[c] == 0 {
            0.0
        } else {
            tp[c] as f64 / (tp[c] + fnn[c]) as f64
        };
        let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        per_class.push((100.0 * p, 100.0 * r, 100.0 * f));
        if present.contains(&c) {
            sp += p;
            sr += r;
            sf += f;
        }
    }
    let k = present.len().max(1) as f64;
    ScoreReport {
        macro_precision: 100.0 * sp / k,
        macro_recall: 100.0 * sr / k,
        macro_f: 100.0 * sf / k,
        accuracy: 100.0 * correct as f64 / predictions.len().max(1) as f64,
        per_class,
        per_fold: Vec::new(),
    }
}

/// Gini impurity of the label distribution: `1 − Σ p_c²`.
pub fn class_imbalance_index(labels: &[usize]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let classes = labels.iter().max().unwrap() + 1;
    let mut counts = vec![0usize; classes];
    for &l in labels {
        counts[l] += 1;
    }
    let n = labels.len() as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

/// Default regularization sweep.
pub const C_GRID: [f64; 3] = [0.1, 1.0, 10.0];

fn evaluate_split(
    data: &LabeledEmbeddings,
    train_idx: &[usize],
    test_idx: &[usize],
    c: f64,
) -> Result<Vec<usize>> {
    let rows: Vec<&[f64]> = train_idx.iter().map(|&i| data.matrix.rows[i].as_slice()).collect();
    let labels: Vec<usize> = train_idx.iter().map(|&i| data.labels[i]).collect();
    let model = train_linear_classifier(&rows, &labels, data.classes, c)?;
    Ok(test_idx.iter().map(|&i| model.predict(&data.matrix.rows[i])).collect())
}

/// Selects C on the training indices by inner stratified 3-fold macro-F.
fn select_c(data: &LabeledEmbeddings, train_idx: &[usize], c_grid: &[f64], seed: u64) -> f64 {
    if c_grid.len() == 1 {
        return c_grid[0];
    }
    let labels: Vec<usize> = train_idx.iter().map(|&i| data.labels[i]).collect();
    let assignment = match stratified_kfold(&labels, 3, derive_seed(seed, "inner-fold", "")) {
        Ok(a) => a,
        Err(_) => return 1.0,
    };
    let mut best_c = c_grid[0];
    let mut best_f = f64::NEG_INFINITY;
    for &c in c_grid {
        let mut predictions = Vec::new();
        let mut truth = Vec::new();
        let mut failed = false;
        for fold in 0..assignment.k {
            let inner_train: Vec<usize> = train_idx
                .iter()
                .zip(&assignment.folds)
                .filter(|(_, &f)| f != fold)
                .map(|(&i, _)| i)
                .collect();
            let inner_test: Vec<usize> = train_idx
                .iter()
                .zip(&assignment.folds)
                .filter(|(_, &f)| f == fold)
                .map(|(&i, _)| i)
                .collect();
            match evaluate_split(data, &inner_train, &inner_test, c) {
                Ok(p) => {
                    predictions.extend(p);
                    truth.extend(inner_test.iter().map(|&i| data.labels[i]));
                }
                Err(_) => {
                    failed = true;
                    break;
                }
            }
        }
        if failed {
            continue;
        }
        let f = macro_scores(&predictions, &truth).macro_f;
        if f > best_f {
            best_f = f;
            best_c = c;
        }
    }
    best_c
}

/// Stratified k-fold cross-validation with per-fold inner C selection.
/// Headline scores pool the out-of-fold predictions; per-fold macro
/// scores are kept alongside.
pub fn cross_validate(
    data: &LabeledEmbeddings,
    k: usize,
    c_grid: &[f64],
    seed: u64,
) -> Result<ScoreReport> {
    if data.classes < 2 {
        return Err(SgError::Domain("classification needs at least 2 classes".into()));
    }
    let assignment = stratified_kfold(&data.labels, k, seed)?;
    let fold_results: Vec<Result<(Vec<usize>, Vec<usize>)>> = (0..assignment.k)
        .into_par_iter()
        .map(|fold| {
            let train_idx: Vec<usize> = (0..data.labels.len())
                .filter(|&i| assignment.folds[i] != fold)
                .collect();
            let test_idx: Vec<usize> = (0..data.labels.len())
                .filter(|&i| assignment.folds[i] == fold)
                .collect();
            let c = select_c(data, &train_idx, c_grid, derive_seed(seed, "select-c", &fold.to_string()));
            let predictions = evaluate_split(data, &train_idx, &test_idx, c)?;
            Ok((predictions, test_idx))
        })
        .collect();

    let mut pooled_pred = vec![0usize; data.labels.len()];
    let mut per_fold = Vec::with_capacity(assignment.k);
    for r in fold_results {
        let (predictions, test_idx) = r?;
        let truth: Vec<usize> = test_idx.iter().map(|&i| data.labels[i]).collect();
        let fold_report = macro_scores(&predictions, &truth);
        per_fold.push((
            fold_report.macro_precision,
            fold_report.macro_recall,
            fold_report.macro_f,
        ));
        for (&i, &p) in test_idx.iter().zip(&predictions) {
            pooled_pred[i] = p;
        }
    }
    let mut report = macro_scores(&pooled_pred, &data.labels);
    report.per_fold = per_fold;
    Ok(report)
}

/// One row of the method × parameter results table.
#[derive(Debug, Clone)]
pub struct ReportRow {
    pub method: String,
    pub parameter: String,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f: f64,
}

pub fn format_report_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from("method,parameter,macro_precision,macro_recall,macro_f\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.2},{:.2},{:.2}\n",
            r.method, r.parameter, r.macro_precision, r.macro_recall, r.macro_f
        ));
    }
    out
}

pub fn format_report_table(rows: &[ReportRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<12} {:<10} {:>10} {:>10} {:>10}\n",
        "method", "parameter", "precision", "recall", "f-measure"
    ));
    for r in rows {
        out.push_str(&format!(
            "{:<12} {:<10} {:>10.2} {:>10.2} {:>10.2}\n",
            r.method, r.parameter, r.macro_precision, r.macro_recall, r.macro_f
        ));
    }
    out
}
