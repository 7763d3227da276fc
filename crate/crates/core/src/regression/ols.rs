//! Ordinary least squares on standardized columns.
//!
//! Columns are z-scored at fit time (means and standard deviations stored in
//! the model) so coefficient magnitudes are comparable across features — the
//! property recursive feature elimination relies on. The solve is
//! minimum-norm via SVD: rank-deficient designs (duplicate or linearly
//! dependent columns are common among the aggregates) get the smallest
//! coefficient vector among the least-squares minimizers instead of an
//! error.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Singular values below this fraction of the largest are treated as exact
/// rank deficiencies. Tight on purpose: only structural linear dependence
/// should be projected out, not weakly identified directions.
const SV_CUTOFF_REL: f64 = 1e-12;

/// A fitted linear model. Coefficients apply to standardized columns; the
/// stored means/stds reproduce the training standardization at predict time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsModel {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

/// Fit least squares of `y` on the standardized columns of `x`.
///
/// Constant columns get coefficient 0 (their standardized version is the
/// zero column). Works for any rank; with more columns than rows the
/// minimum-norm interpolating solution is returned.
pub fn ols_fit(x: &DenseMatrix, y: &[f64]) -> Result<OlsModel> {
    let (n, p) = (x.nrows(), x.ncols());
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    if y.len() != n {
        return Err(Error::LengthMismatch { what: "targets", expected: n, got: y.len() });
    }

    let (means, stds) = x.column_moments();
    let intercept = y.iter().sum::<f64>() / n as f64;

    // standardized design; constant columns become zero columns and thus
    // receive zero coefficients from the minimum-norm solve
    let mut z = DMatrix::<f64>::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            if stds[j] > 0.0 {
                z[(i, j)] = (x.get(i, j) - means[j]) / stds[j];
            }
        }
    }
    let centered = DVector::from_iterator(n, y.iter().map(|v| v - intercept));

    let coefficients = if p == 0 {
        Vec::new()
    } else {
        min_norm_solve(&z, &centered)
    };

    Ok(OlsModel { coefficients, intercept, means, stds })
}

/// β = V Σ⁺ Uᵀ r with a relative singular-value cutoff.
fn min_norm_solve(z: &DMatrix<f64>, r: &DVector<f64>) -> Vec<f64> {
    let svd = z.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let max_sv = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let cutoff = max_sv * SV_CUTOFF_REL;

    let mut w = u.transpose() * r;
    for (i, sv) in svd.singular_values.iter().enumerate() {
        w[i] = if *sv > cutoff { w[i] / sv } else { 0.0 };
    }
    (v_t.transpose() * w).iter().copied().collect()
}

impl OlsModel {
    pub fn n_features(&self) -> usize {
        self.coefficients.len()
    }

    /// Predict one row (original, unstandardized units).
    pub fn predict_row(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.n_features() {
            return Err(Error::ColumnMismatch { expected: self.n_features(), got: row.len() });
        }
        let mut value = self.intercept;
        for (j, &x) in row.iter().enumerate() {
            if self.stds[j] > 0.0 {
                value += self.coefficients[j] * (x - self.means[j]) / self.stds[j];
            }
        }
        Ok(value)
    }

    pub fn predict(&self, x: &DenseMatrix) -> Result<Vec<f64>> {
        if x.ncols() != self.n_features() {
            return Err(Error::ColumnMismatch { expected: self.n_features(), got: x.ncols() });
        }
        (0..x.nrows()).map(|i| self.predict_row(x.row(i))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[Vec<f64>]) -> DenseMatrix {
        DenseMatrix::from_row_slices(rows)
    }

    #[test]
    fn exact_line_is_recovered() {
        // y = 2x + 1 on x = 0..5
        let x = matrix(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0], vec![4.0]]);
        let y = [1.0, 3.0, 5.0, 7.0, 9.0];
        let model = ols_fit(&x, &y).unwrap();
        let preds = model.predict(&x).unwrap();
        for (p, t) in preds.iter().zip(y.iter()) {
            assert!((p - t).abs() < 1e-10, "{p} vs {t}");
        }
        // unseen point stays on the line
        let out = model.predict_row(&[10.0]).unwrap();
        assert!((out - 21.0).abs() < 1e-9);
    }

    #[test]
    fn constant_target_gives_intercept_only() {
        let x = matrix(&[vec![1.0, 5.0], vec![2.0, 6.0], vec![3.0, 4.0]]);
        let y = [7.0, 7.0, 7.0];
        let model = ols_fit(&x, &y).unwrap();
        assert!((model.intercept - 7.0).abs() < 1e-12);
        for c in &model.coefficients {
            assert!(c.abs() < 1e-10);
        }
        assert!((model.predict_row(&[9.0, -3.0]).unwrap() - 7.0).abs() < 1e-9);
    }

    #[test]
    fn planted_two_feature_combination_is_recovered() {
        // y = 3 x1 - 2 x2 + 0.5, deterministic pseudo-random design
        let mut rows = Vec::new();
        let mut y = Vec::new();
        let mut state = 1u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as f64) / ((1u64 << 31) as f64) - 0.5
        };
        for _ in 0..40 {
            let (x1, x2) = (next(), next());
            rows.push(vec![x1, x2]);
            y.push(3.0 * x1 - 2.0 * x2 + 0.5);
        }
        let x = matrix(&rows);
        let model = ols_fit(&x, &y).unwrap();
        let preds = model.predict(&x).unwrap();
        for (p, t) in preds.iter().zip(y.iter()) {
            assert!((p - t).abs() < 1e-8);
        }
        // coefficient in original units = standardized coefficient / std
        let b1 = model.coefficients[0] / model.stds[0];
        let b2 = model.coefficients[1] / model.stds[1];
        assert!((b1 - 3.0).abs() < 1e-8, "{b1}");
        assert!((b2 + 2.0).abs() < 1e-8, "{b2}");
    }

    #[test]
    fn residuals_are_orthogonal_to_standardized_columns() {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| {
                let t = i as f64;
                vec![t, (t * 0.7).sin(), t * t * 0.01]
            })
            .collect();
        let y: Vec<f64> = (0..30).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let x = matrix(&rows);
        let model = ols_fit(&x, &y).unwrap();
        let preds = model.predict(&x).unwrap();
        let resid: Vec<f64> = y.iter().zip(&preds).map(|(t, p)| t - p).collect();
        let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let (means, stds) = x.column_moments();
        for j in 0..x.ncols() {
            let dot: f64 = (0..x.nrows())
                .map(|i| resid[i] * (x.get(i, j) - means[j]) / stds[j])
                .sum();
            assert!(dot.abs() <= 1e-8 * y_norm, "column {j}: {dot}");
        }
        // residuals also sum to zero (intercept direction)
        assert!(resid.iter().sum::<f64>().abs() <= 1e-8 * y_norm);
    }

    #[test]
    fn duplicate_columns_do_not_break_the_fit() {
        let rows: Vec<Vec<f64>> = (0..12).map(|i| {
            let t = i as f64;
            vec![t, t, 1.0 + t * 0.5]
        }).collect();
        let y: Vec<f64> = (0..12).map(|i| 4.0 * i as f64 + 1.0).collect();
        let x = matrix(&rows);
        let model = ols_fit(&x, &y).unwrap();
        let preds = model.predict(&x).unwrap();
        for (p, t) in preds.iter().zip(y.iter()) {
            assert!((p - t).abs() < 1e-8);
        }
        // minimum-norm splits weight evenly across the duplicates
        assert!((model.coefficients[0] - model.coefficients[1]).abs() < 1e-8);
    }

    #[test]
    fn in_sample_mse_never_exceeds_target_variance() {
        let rows: Vec<Vec<f64>> = (0..25)
            .map(|i| vec![(i as f64 * 1.3).cos(), ((i * i) % 7) as f64])
            .collect();
        let y: Vec<f64> = (0..25).map(|i| ((i * 13) % 17) as f64).collect();
        let x = matrix(&rows);
        let model = ols_fit(&x, &y).unwrap();
        let preds = model.predict(&x).unwrap();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / y.len() as f64;
        let mse = preds.iter().zip(&y).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / y.len() as f64;
        assert!(mse <= var + 1e-12, "mse {mse} var {var}");
    }

    #[test]
    fn shape_errors_are_reported() {
        let x = matrix(&[vec![1.0], vec![2.0]]);
        assert!(matches!(ols_fit(&x, &[1.0]), Err(Error::LengthMismatch { .. })));
        let empty = DenseMatrix::zeros(0, 3);
        assert!(matches!(ols_fit(&empty, &[]), Err(Error::EmptyMatrix)));
        let model = ols_fit(&x, &[1.0, 2.0]).unwrap();
        assert!(matches!(model.predict_row(&[1.0, 2.0]), Err(Error::ColumnMismatch { .. })));
    }
}
