//! Feature selection over matrix columns: univariate correlation ranking
//! and recursive feature elimination driven by standardized OLS
//! coefficients.
//!
//! Both selectors break ties toward earlier columns, so selection over the
//! canonically ordered aggregate columns is fully deterministic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::regression::ols_fit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMethod {
    Univariate,
    Rfe,
}

/// Outcome of one selection run over the columns of a design matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub method: SelectionMethod,
    pub k: usize,
    /// The k chosen column indices, highest score first (ties: lower index).
    pub chosen: Vec<usize>,
    /// Per-column scores: squared correlation for univariate, |standardized
    /// coefficient| at elimination (or in the final fit) for RFE.
    pub scores: Vec<f64>,
    /// True when no column carried any signal; the choice fell back to the
    /// first k columns.
    pub degenerate: bool,
}

fn check_k(k: usize, columns: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidConfig("selection k must be at least 1".into()));
    }
    if k > columns {
        return Err(Error::SelectionTooLarge { k, columns });
    }
    Ok(())
}

fn rank_by_score(scores: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b].partial_cmp(&scores[a]).expect("finite scores").then(a.cmp(&b))
    });
    order.truncate(k);
    order
}

/// Rank columns by squared Pearson correlation with the target and keep the
/// top k. Constant columns (or a constant target) score 0.
pub fn univariate_select(x: &DenseMatrix, y: &[f64], k: usize) -> Result<SelectionResult> {
    let (n, p) = (x.nrows(), x.ncols());
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    if y.len() != n {
        return Err(Error::LengthMismatch { what: "targets", expected: n, got: y.len() });
    }
    check_k(k, p)?;

    let y_mean = y.iter().sum::<f64>() / n as f64;
    let y_ss: f64 = y.iter().map(|v| (v - y_mean) * (v - y_mean)).sum();
    let (means, stds) = x.column_moments();

    // exact constancy check: mean rounding can leave y_ss a hair above zero
    let y_constant = y.iter().all(|v| *v == y[0]);
    let mut scores = vec![0.0; p];
    if !y_constant && y_ss > 0.0 {
        for j in 0..p {
            if stds[j] == 0.0 {
                continue;
            }
            let mut cov = 0.0;
            let mut x_ss = 0.0;
            for (i, &yi) in y.iter().enumerate().take(n) {
                let dx = x.get(i, j) - means[j];
                cov += dx * (yi - y_mean);
                x_ss += dx * dx;
            }
            scores[j] = (cov * cov) / (x_ss * y_ss);
        }
    }

    let degenerate = scores.iter().all(|s| *s == 0.0);
    Ok(SelectionResult {
        method: SelectionMethod::Univariate,
        k,
        chosen: rank_by_score(&scores, k),
        scores,
        degenerate,
    })
}

/// Recursive feature elimination: repeatedly fit standardized OLS on the
/// surviving columns and drop the one with the smallest absolute
/// coefficient, until k remain. Ties drop the later column.
pub fn rfe_select(x: &DenseMatrix, y: &[f64], k: usize) -> Result<SelectionResult> {
    let (n, p) = (x.nrows(), x.ncols());
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    if y.len() != n {
        return Err(Error::LengthMismatch { what: "targets", expected: n, got: y.len() });
    }
    check_k(k, p)?;

    // a constant target drives every coefficient to (numerical) zero; skip
    // the fits and fall back to the first k columns, flagged
    if y.iter().all(|v| *v == y[0]) {
        return Ok(SelectionResult {
            method: SelectionMethod::Rfe,
            k,
            chosen: (0..k).collect(),
            scores: vec![0.0; p],
            degenerate: true,
        });
    }

    let mut survivors: Vec<usize> = (0..p).collect();
    let mut scores = vec![0.0; p];
    while survivors.len() > k {
        let sub = x.select_columns(&survivors);
        let model = ols_fit(&sub, y)?;
        let mut victim = 0usize;
        let mut victim_abs = f64::INFINITY;
        for (pos, coef) in model.coefficients.iter().enumerate() {
            let a = coef.abs();
            // <= prefers the later column on ties, keeping earlier ones
            if a <= victim_abs {
                victim_abs = a;
                victim = pos;
            }
        }
        scores[survivors[victim]] = victim_abs;
        survivors.remove(victim);
    }

    // score survivors with one final fit so the ranking is meaningful
    let sub = x.select_columns(&survivors);
    let model = ols_fit(&sub, y)?;
    for (pos, col) in survivors.iter().enumerate() {
        scores[*col] = model.coefficients[pos].abs();
    }
    let mut chosen = survivors.clone();
    chosen.sort_by(|&a, &b| {
        scores[b].partial_cmp(&scores[a]).expect("finite scores").then(a.cmp(&b))
    });
    let degenerate = survivors.iter().all(|&c| scores[c] == 0.0);
    Ok(SelectionResult { method: SelectionMethod::Rfe, k, chosen, scores, degenerate })
}
