use crate::error::{Error, Result};

/// Compressed sparse row matrix. Column indices are strictly increasing within a row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from raw CSR arrays, validating the structural invariants.
    pub fn new(
        rows: usize,
        cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != rows + 1 || row_ptr[0] != 0 {
            return Err(Error::Input(
                "row pointer must have rows + 1 entries starting at 0".into(),
            ));
        }
        if col_idx.len() != values.len() || *row_ptr.last().unwrap() != values.len() {
            return Err(Error::Input("row pointer does not match nnz".into()));
        }
        for r in 0..rows {
            if row_ptr[r] > row_ptr[r + 1] {
                return Err(Error::Input(format!("row pointer decreases at row {r}")));
            }
            let cols_in_row = &col_idx[row_ptr[r]..row_ptr[r + 1]];
            if cols_in_row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Input(format!(
                    "column indices not increasing in row {r}"
                )));
            }
            if cols_in_row.last().is_some_and(|&c| c >= cols) {
                return Err(Error::Input(format!(
                    "column index out of range in row {r}"
                )));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("non-finite matrix entry".into()));
        }
        Ok(Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Builds from per-row `(column, value)` lists; entries are sorted and
    /// explicit zeros dropped.
    pub fn from_rows(cols: usize, rows: &[Vec<(usize, f64)>]) -> Result<Self> {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in rows {
            let mut row = row.clone();
            row.sort_by_key(|&(c, _)| c);
            for (c, v) in row {
                if v != 0.0 {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(values.len());
        }
        Self::new(rows.len(), cols, row_ptr, col_idx, values)
    }

    pub fn from_dense(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        let rows_vec: Vec<Vec<(usize, f64)>> = (0..rows)
            .map(|r| (0..cols).map(|c| (c, data[r * cols + c])).collect())
            .collect();
        Self::from_rows(cols, &rows_vec)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterates the `(column, value)` pairs of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    /// `out = A x`
    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *o = acc;
        }
    }

    /// `out = A^T y`
    pub fn mul_transpose_vec(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        out.iter_mut().for_each(|v| *v = 0.0);
        for (r, &yr) in y.iter().enumerate() {
            if yr == 0.0 {
                continue;
            }
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                out[self.col_idx[k]] += self.values[k] * yr;
            }
        }
    }
}
