use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

/// A dense labelled sample matrix, rows are samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<usize>,
    dim: usize,
    classes: usize,
}

impl Dataset {
    /// `features` is row-major with `dim` columns; labels must lie in
    /// `0..classes`.
    pub fn new(features: Vec<f64>, labels: Vec<usize>, dim: usize, classes: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::argument("dataset has no samples"));
        }
        if dim == 0 || classes < 2 {
            return Err(Error::argument(format!("need d >= 1 and K >= 2, got d={dim}, K={classes}")));
        }
        if features.len() != labels.len() * dim {
            return Err(Error::Dimension { expected: labels.len() * dim, found: features.len() });
        }
        if features.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("dataset features"));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= classes) {
            return Err(Error::argument(format!("label {bad} outside 0..{classes}")));
        }
        Ok(Dataset { features, labels, dim, classes })
    }

    pub fn num_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.classes
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.features[n * self.dim..(n + 1) * self.dim]
    }

    pub fn label(&self, n: usize) -> usize {
        self.labels[n]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    /// The rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &n in indices {
            if n >= self.num_samples() {
                return Err(Error::argument(format!("row {n} out of range")));
            }
            features.extend_from_slice(self.row(n));
            labels.push(self.labels[n]);
        }
        Dataset::new(features, labels, self.dim, self.classes)
    }
}
