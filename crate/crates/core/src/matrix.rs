use std::collections::BTreeSet;

use crate::{Error, Result};

/// Dense row-major matrix of finite `f64`, one datapoint per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix, rejecting empty shapes, length mismatches and
    /// non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || rows.checked_mul(cols) != Some(data.len()) {
            return Err(Error::InvalidShape { rows, cols, len: data.len() });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: pos / cols, col: pos % cols });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::InvalidShape { rows: rows.len(), cols, len: r.len() });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.cols)
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Copies the given rows, in the given order, into a new matrix.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self::new(indices.len(), self.cols, data)
    }

    /// Every entry multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        Self::new(self.rows, self.cols, self.data.iter().map(|v| v * alpha).collect())
    }

    /// Each row concatenated with `copies` further copies of itself, the
    /// shape change of stacking a grayscale image into extra channels.
    pub fn stack_copies(&self, copies: usize) -> Self {
        let cols = self.cols * (copies + 1);
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in self.iter_rows() {
            for _ in 0..=copies {
                data.extend_from_slice(r);
            }
        }
        Self { rows: self.rows, cols, data }
    }
}

/// Point cloud with one nonnegative integer label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    points: Matrix,
    labels: Vec<u64>,
}

impl LabeledDataset {
    pub fn new(points: Matrix, labels: Vec<u64>) -> Result<Self> {
        if labels.len() != points.rows() {
            return Err(Error::LabelCountMismatch { labels: labels.len(), rows: points.rows() });
        }
        Ok(Self { points, labels })
    }

    pub fn points(&self) -> &Matrix {
        &self.points
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Distinct label values in ascending order.
    pub fn classes(&self) -> Vec<u64> {
        self.labels.iter().copied().collect::<BTreeSet<_>>().into_iter().collect()
    }

    /// Row indices of each class, classes in ascending label order.
    pub fn class_members(&self) -> Vec<(u64, Vec<usize>)> {
        self.classes().into_iter().map(|c| (c, (0..self.len()).filter(|&i| self.labels[i] == c).collect())).collect()
    }

    pub fn into_parts(self) -> (Matrix, Vec<u64>) {
        (self.points, self.labels)
    }
}
