//! Minimal dense row-major matrix used by the regression and selection
//! modules. Feature semantics (column names, sample keys) live in
//! [`crate::aggregators::FeatureMatrix`], which wraps one of these.

/// Dense row-major `f64` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    values: Vec<f64>,
}

impl DenseMatrix {
    /// Build from row-major values. Panics if the length is not `nrows * ncols`.
    pub fn from_rows(nrows: usize, ncols: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), nrows * ncols, "row-major length mismatch");
        Self { nrows, ncols, values }
    }

    /// Build from a list of equally sized rows.
    pub fn from_row_slices(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(nrows * ncols);
        for r in rows {
            assert_eq!(r.len(), ncols, "ragged rows");
            values.extend_from_slice(r);
        }
        Self { nrows, ncols, values }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, values: vec![0.0; nrows * ncols] }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.ncols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.values[row * self.ncols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.ncols..(row + 1) * self.ncols]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.nrows).map(|r| self.get(r, col)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// New matrix keeping only `cols`, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut values = Vec::with_capacity(self.nrows * cols.len());
        for r in 0..self.nrows {
            let row = self.row(r);
            values.extend(cols.iter().map(|&c| row[c]));
        }
        Self { nrows: self.nrows, ncols: cols.len(), values }
    }

    /// New matrix keeping only `rows`, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut values = Vec::with_capacity(rows.len() * self.ncols);
        for &r in rows {
            values.extend_from_slice(self.row(r));
        }
        Self { nrows: rows.len(), ncols: self.ncols, values }
    }

    /// Per-column mean and population standard deviation.
    pub fn column_moments(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.nrows as f64;
        let mut means = vec![0.0; self.ncols];
        let mut stds = vec![0.0; self.ncols];
        if self.nrows == 0 {
            return (means, stds);
        }
        for r in 0..self.nrows {
            for (c, v) in self.row(r).iter().enumerate() {
                means[c] += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        for r in 0..self.nrows {
            for (c, v) in self.row(r).iter().enumerate() {
                let d = v - means[c];
                stds[c] += d * d;
            }
        }
        for s in &mut stds {
            *s = (*s / n).sqrt();
        }
        (means, stds)
    }
}
