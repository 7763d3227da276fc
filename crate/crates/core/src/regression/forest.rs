//! Random-forest regression: bagged CART trees with variance-reduction
//! splits and impurity-based feature importance.
//!
//! Determinism is a hard requirement: each tree derives its own RNG stream
//! from the model seed and its tree index, and trees are collected in index
//! order, so refits produce byte-identical models regardless of how many
//! rayon threads build them.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestHyperparams {
    pub n_trees: usize,
    /// Features considered per split; `None` means ⌈√p⌉.
    pub max_features: Option<usize>,
    /// Minimum samples in each child of a split.
    pub min_leaf: usize,
}

impl Default for ForestHyperparams {
    fn default() -> Self {
        Self { n_trees: 100, max_features: None, min_leaf: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Tree {
    /// Post-order arena; the root is the last node.
    nodes: Vec<Node>,
    /// Per-feature sum of (n_node/n_total) · variance reduction.
    importance: Vec<f64>,
}

impl Tree {
    fn predict_row(&self, row: &[f64]) -> f64 {
        let mut ix = self.nodes.len() - 1;
        loop {
            match &self.nodes[ix] {
                Node::Leaf { value } => return *value,
                Node::Split { feature, threshold, left, right } => {
                    ix = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

/// A fitted forest. Hyperparameters and seed are retained so a fit is fully
/// reproducible from the model's own description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    trees: Vec<Tree>,
    pub hyperparams: ForestHyperparams,
    pub seed: u64,
    n_features: usize,
    resolved_max_features: usize,
}

/// Normalized impurity importances of one or more fitted models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    /// Per-feature mean importance; sums to 1 unless degenerate.
    pub mean: Vec<f64>,
    /// Per-feature spread across the averaged models; zero for one model.
    pub std: Vec<f64>,
    pub n_models: usize,
    /// True when no split was ever made: importances are all zero.
    pub degenerate: bool,
}

fn tree_seed(seed: u64, tree_ix: usize) -> u64 {
    seed.wrapping_add((tree_ix as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Fit `hp.n_trees` trees on bootstrap resamples of the rows of `x`.
pub fn forest_fit(
    x: &DenseMatrix,
    y: &[f64],
    hp: &ForestHyperparams,
    seed: u64,
) -> Result<ForestModel> {
    let (n, p) = (x.nrows(), x.ncols());
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    if y.len() != n {
        return Err(Error::LengthMismatch { what: "targets", expected: n, got: y.len() });
    }
    if hp.n_trees == 0 {
        return Err(Error::InvalidConfig("n_trees must be at least 1".into()));
    }
    if hp.min_leaf == 0 {
        return Err(Error::InvalidConfig("min_leaf must be at least 1".into()));
    }
    let resolved_max_features = match hp.max_features {
        Some(0) => {
            return Err(Error::InvalidConfig("max_features must be at least 1".into()))
        }
        Some(m) => m.min(p),
        None => (p as f64).sqrt().ceil() as usize,
    };

    let trees: Vec<Tree> = (0..hp.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(tree_seed(seed, t));
            let samples: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            let mut builder = TreeBuilder {
                x,
                y,
                min_leaf: hp.min_leaf,
                max_features: resolved_max_features,
                n_total: n,
                nodes: Vec::new(),
                importance: vec![0.0; p],
                rng,
            };
            builder.grow(samples);
            Tree { nodes: builder.nodes, importance: builder.importance }
        })
        .collect();

    Ok(ForestModel { trees, hyperparams: *hp, seed, n_features: p, resolved_max_features })
}

struct TreeBuilder<'a> {
    x: &'a DenseMatrix,
    y: &'a [f64],
    min_leaf: usize,
    max_features: usize,
    n_total: usize,
    nodes: Vec<Node>,
    importance: Vec<f64>,
    rng: ChaCha8Rng,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    children_sse: f64,
}

impl TreeBuilder<'_> {
    /// Grow a subtree over `samples` (bootstrap indices, duplicates normal);
    /// returns the subtree root's node index.
    fn grow(&mut self, samples: Vec<usize>) -> usize {
        let n = samples.len();
        let sum: f64 = samples.iter().map(|&s| self.y[s]).sum();
        let sumsq: f64 = samples.iter().map(|&s| self.y[s] * self.y[s]).sum();
        let mean = sum / n as f64;
        let parent_sse = (sumsq - sum * sum / n as f64).max(0.0);

        let first = self.y[samples[0]];
        let pure = samples.iter().all(|&s| self.y[s] == first);
        if n < 2 * self.min_leaf || pure || self.x.ncols() == 0 {
            self.nodes.push(Node::Leaf { value: mean });
            return self.nodes.len() - 1;
        }

        match self.best_split(&samples, sum, sumsq, parent_sse) {
            None => {
                self.nodes.push(Node::Leaf { value: mean });
                self.nodes.len() - 1
            }
            Some(best) => {
                self.importance[best.feature] +=
                    (parent_sse - best.children_sse) / self.n_total as f64;
                let (left, right): (Vec<usize>, Vec<usize>) = samples
                    .into_iter()
                    .partition(|&s| self.x.get(s, best.feature) <= best.threshold);
                let left_ix = self.grow(left);
                let right_ix = self.grow(right);
                self.nodes.push(Node::Split {
                    feature: best.feature,
                    threshold: best.threshold,
                    left: left_ix,
                    right: right_ix,
                });
                self.nodes.len() - 1
            }
        }
    }

    fn best_split(
        &mut self,
        samples: &[usize],
        sum: f64,
        sumsq: f64,
        parent_sse: f64,
    ) -> Option<BestSplit> {
        let n = samples.len();
        let candidates = self.sample_features();
        let mut best: Option<BestSplit> = None;
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n);

        for feature in candidates {
            pairs.clear();
            pairs.extend(samples.iter().map(|&s| (self.x.get(s, feature), self.y[s])));
            pairs.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));

            let mut sum_left = 0.0;
            let mut sumsq_left = 0.0;
            for i in 1..n {
                let (v_prev, t_prev) = pairs[i - 1];
                sum_left += t_prev;
                sumsq_left += t_prev * t_prev;
                let v_next = pairs[i].0;
                if v_prev >= v_next || i < self.min_leaf || n - i < self.min_leaf {
                    continue;
                }
                let n_l = i as f64;
                let n_r = (n - i) as f64;
                let sse_l = (sumsq_left - sum_left * sum_left / n_l).max(0.0);
                let sum_r = sum - sum_left;
                let sse_r = ((sumsq - sumsq_left) - sum_r * sum_r / n_r).max(0.0);
                let children_sse = sse_l + sse_r;
                if children_sse >= parent_sse {
                    continue; // no impurity gain
                }
                if best.as_ref().is_none_or(|b| children_sse < b.children_sse) {
                    // midpoint threshold, nudged left if rounding reached the
                    // right value, so both children stay non-empty under <=
                    let mut threshold = v_prev + (v_next - v_prev) / 2.0;
                    if threshold >= v_next {
                        threshold = v_prev;
                    }
                    best = Some(BestSplit { feature, threshold, children_sse });
                }
            }
        }
        best
    }

    /// Sample `max_features` distinct feature indices (partial Fisher-Yates).
    fn sample_features(&mut self) -> Vec<usize> {
        let p = self.x.ncols();
        let k = self.max_features.min(p);
        let mut pool: Vec<usize> = (0..p).collect();
        for i in 0..k {
            let j = self.rng.gen_range(i..p);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}

impl ForestModel {
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn max_features(&self) -> usize {
        self.resolved_max_features
    }

    pub fn predict_row(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.n_features {
            return Err(Error::ColumnMismatch { expected: self.n_features, got: row.len() });
        }
        let sum: f64 = self.trees.iter().map(|t| t.predict_row(row)).sum();
        Ok(sum / self.trees.len() as f64)
    }

    pub fn predict(&self, x: &DenseMatrix) -> Result<Vec<f64>> {
        if x.ncols() != self.n_features {
            return Err(Error::ColumnMismatch { expected: self.n_features, got: x.ncols() });
        }
        (0..x.nrows()).map(|i| self.predict_row(x.row(i))).collect()
    }
}

/// Impurity importance of one fitted forest, normalized to sum to 1.
/// A forest that never split (constant targets) is flagged degenerate and
/// reports all zeros.
pub fn forest_importance(model: &ForestModel) -> ImportanceReport {
    let p = model.n_features;
    let mut total = vec![0.0; p];
    for tree in &model.trees {
        for (acc, v) in total.iter_mut().zip(&tree.importance) {
            *acc += v;
        }
    }
    let mass: f64 = total.iter().sum();
    if mass > 0.0 {
        for v in &mut total {
            *v /= mass;
        }
        ImportanceReport { mean: total, std: vec![0.0; p], n_models: 1, degenerate: false }
    } else {
        ImportanceReport { mean: total, std: vec![0.0; p], n_models: 1, degenerate: true }
    }
}

/// Combine importance reports from several models (e.g. one per backtest
/// period): per-feature mean and population standard deviation of the
/// per-model means.
pub fn average_importances(reports: &[ImportanceReport]) -> Result<ImportanceReport> {
    let Some(first) = reports.first() else {
        return Err(Error::InvalidConfig("no importance reports to average".into()));
    };
    let p = first.mean.len();
    for r in reports {
        if r.mean.len() != p {
            return Err(Error::LengthMismatch {
                what: "importance vectors",
                expected: p,
                got: r.mean.len(),
            });
        }
    }
    let k = reports.len() as f64;
    let mut mean = vec![0.0; p];
    for r in reports {
        for (m, v) in mean.iter_mut().zip(&r.mean) {
            *m += v / k;
        }
    }
    let mut std = vec![0.0; p];
    for r in reports {
        for ((s, m), v) in std.iter_mut().zip(&mean).zip(&r.mean) {
            *s += (v - m) * (v - m) / k;
        }
    }
    for s in &mut std {
        *s = s.sqrt();
    }
    Ok(ImportanceReport {
        mean,
        std,
        n_models: reports.iter().map(|r| r.n_models).sum(),
        degenerate: reports.iter().all(|r| r.degenerate),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn planted_data(n: usize) -> (DenseMatrix, Vec<f64>) {
        // y follows x0 exactly; x1 and x2 are deterministic noise
        let mut rows = Vec::new();
        let mut y = Vec::new();
        let mut state = 9u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as f64) / ((1u64 << 31) as f64)
        };
        for _ in 0..n {
            let x0 = next();
            rows.push(vec![x0, next(), next()]);
            y.push(10.0 * x0);
        }
        (DenseMatrix::from_row_slices(&rows), y)
    }

    #[test]
    fn same_seed_same_model() {
        let (x, y) = planted_data(60);
        let hp = ForestHyperparams { n_trees: 16, ..Default::default() };
        let a = forest_fit(&x, &y, &hp, 7).unwrap();
        let b = forest_fit(&x, &y, &hp, 7).unwrap();
        assert_eq!(a, b);
        let pa = a.predict(&x).unwrap();
        let pb = b.predict(&x).unwrap();
        assert_eq!(pa, pb);
    }

    #[test]
    fn different_seeds_differ() {
        let (x, y) = planted_data(60);
        let hp = ForestHyperparams { n_trees: 8, ..Default::default() };
        let a = forest_fit(&x, &y, &hp, 1).unwrap();
        let b = forest_fit(&x, &y, &hp, 2).unwrap();
        assert_ne!(a.predict(&x).unwrap(), b.predict(&x).unwrap());
    }

    #[test]
    fn predictions_stay_within_training_target_range() {
        let (x, y) = planted_data(80);
        let hp = ForestHyperparams { n_trees: 24, ..Default::default() };
        let model = forest_fit(&x, &y, &hp, 3).unwrap();
        let lo = y.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        // probe far outside the training domain
        let probe = DenseMatrix::from_row_slices(&[vec![-100.0, 0.0, 0.0], vec![100.0, 1.0, 1.0]]);
        for p in model.predict(&probe).unwrap() {
            assert!(p >= lo && p <= hi, "{p} outside [{lo}, {hi}]");
        }
    }

    #[test]
    fn in_sample_mse_beats_target_variance() {
        let (x, y) = planted_data(100);
        let hp = ForestHyperparams { n_trees: 50, ..Default::default() };
        let model = forest_fit(&x, &y, &hp, 11).unwrap();
        let preds = model.predict(&x).unwrap();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / y.len() as f64;
        let mse = preds.iter().zip(&y).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / y.len() as f64;
        assert!(mse < var, "mse {mse} var {var}");
    }

    #[test]
    fn planted_driver_dominates_importance() {
        let (x, y) = planted_data(200);
        let hp = ForestHyperparams { n_trees: 50, ..Default::default() };
        let model = forest_fit(&x, &y, &hp, 5).unwrap();
        let report = forest_importance(&model);
        assert!(!report.degenerate);
        assert!((report.mean.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(report.mean[0] > 0.9, "importance {:?}", report.mean);
    }

    #[test]
    fn single_feature_importance_is_one() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..40).map(|i| (i * i) as f64).collect();
        let x = DenseMatrix::from_row_slices(&rows);
        let model = forest_fit(&x, &y, &ForestHyperparams::default(), 2).unwrap();
        let report = forest_importance(&model);
        assert_eq!(report.mean, vec![1.0]);
    }

    #[test]
    fn constant_targets_yield_degenerate_importance() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, (i % 3) as f64]).collect();
        let y = vec![4.2; 20];
        let x = DenseMatrix::from_row_slices(&rows);
        let model = forest_fit(&x, &y, &ForestHyperparams::default(), 1).unwrap();
        let report = forest_importance(&model);
        assert!(report.degenerate);
        assert!(report.mean.iter().all(|v| *v == 0.0));
        // and predictions are exactly the constant
        assert!(model.predict(&x).unwrap().iter().all(|p| (p - 4.2).abs() < 1e-12));
    }

    #[test]
    fn averaging_identical_reports_gives_zero_std() {
        let (x, y) = planted_data(50);
        let model = forest_fit(&x, &y, &ForestHyperparams { n_trees: 10, ..Default::default() }, 4)
            .unwrap();
        let r = forest_importance(&model);
        let avg = average_importances(&[r.clone(), r.clone()]).unwrap();
        assert_eq!(avg.mean, r.mean);
        assert!(avg.std.iter().all(|s| *s == 0.0));
        assert_eq!(avg.n_models, 2);
    }

    #[test]
    fn min_leaf_is_respected() {
        let (x, y) = planted_data(30);
        let hp = ForestHyperparams { n_trees: 5, max_features: Some(3), min_leaf: 10 };
        let model = forest_fit(&x, &y, &hp, 6).unwrap();
        // with min_leaf 10 of 30 samples, trees are shallow: max 2 splits
        for tree in &model.trees {
            let splits = tree.nodes.iter().filter(|n| matches!(n, Node::Split { .. })).count();
            assert!(splits <= 2, "{splits} splits");
        }
    }

    #[test]
    fn invalid_hyperparams_are_rejected() {
        let (x, y) = planted_data(10);
        let bad_trees = ForestHyperparams { n_trees: 0, ..Default::default() };
        assert!(forest_fit(&x, &y, &bad_trees, 0).is_err());
        let bad_leaf = ForestHyperparams { min_leaf: 0, ..Default::default() };
        assert!(forest_fit(&x, &y, &bad_leaf, 0).is_err());
        let bad_feats = ForestHyperparams { max_features: Some(0), ..Default::default() };
        assert!(forest_fit(&x, &y, &bad_feats, 0).is_err());
    }
}
