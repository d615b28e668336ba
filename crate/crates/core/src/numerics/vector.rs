use alloc::vec;
use alloc::vec::Vec;
use core::ops::Index;

use crate::{Error, Result};

/// A d-dimensional real vector, `d >= 1`.
///
/// Carries iterates, gradients and the ADAM moment estimates. The length is
/// fixed at construction; there is no way to grow or shrink a vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    /// Wraps `values`, rejecting empty input and non-finite entries.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::argument("vector must have at least one entry"));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("vector construction"));
        }
        Ok(DenseVector(values))
    }

    pub fn zeros(len: usize) -> Self {
        assert!(len > 0, "vector must have at least one entry");
        DenseVector(vec![0.0; len])
    }

    pub fn filled(len: usize, value: f64) -> Self {
        assert!(len > 0, "vector must have at least one entry");
        assert!(value.is_finite(), "fill value must be finite");
        DenseVector(vec![value; len])
    }

    pub fn scalar(value: f64) -> Self {
        DenseVector::filled(1, value)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; present for API symmetry with slices.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Mutable access to the entries. Callers that write through this are
    /// responsible for keeping entries finite; [`DenseVector::check_finite`]
    /// re-establishes the invariant.
    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn check_finite(&self, context: &'static str) -> Result<()> {
        if self.0.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite(context))
        }
    }

    pub fn check_len(&self, expected: usize) -> Result<()> {
        if self.len() == expected {
            Ok(())
        } else {
            Err(Error::Dimension { expected, found: self.len() })
        }
    }

    pub fn set_zero(&mut self) {
        self.0.iter_mut().for_each(|x| *x = 0.0);
    }

    pub fn copy_from(&mut self, other: &DenseVector) {
        self.0.copy_from_slice(&other.0);
    }

    pub fn dot(&self, other: &DenseVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm2(&self) -> f64 {
        libm::sqrt(self.0.iter().map(|x| x * x).sum())
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    /// `‖self - other‖₂`.
    pub fn distance(&self, other: &DenseVector) -> f64 {
        libm::sqrt(self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum())
    }

    pub fn sub(&self, other: &DenseVector) -> Result<DenseVector> {
        axpy(-1.0, other, self)
    }

    pub fn scaled(&self, a: f64) -> DenseVector {
        DenseVector(self.0.iter().map(|x| a * x).collect())
    }

    /// `self += a * x` in place.
    pub fn add_scaled(&mut self, a: f64, x: &DenseVector) {
        debug_assert_eq!(self.len(), x.len());
        self.0.iter_mut().zip(&x.0).for_each(|(y, x)| *y += a * x);
    }
}

impl Index<usize> for DenseVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// `a * x + y`, elementwise.
pub fn axpy(a: f64, x: &DenseVector, y: &DenseVector) -> Result<DenseVector> {
    if !a.is_finite() {
        return Err(Error::NonFinite("axpy scale"));
    }
    y.check_len(x.len())?;
    let out = DenseVector(x.0.iter().zip(&y.0).map(|(x, y)| a * x + y).collect());
    out.check_finite("axpy")?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn v(x: &[f64]) -> DenseVector {
        DenseVector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn axpy_examples() {
        assert_eq!(axpy(0.0, &v(&[1.0, 2.0]), &v(&[3.0, 4.0])).unwrap(), v(&[3.0, 4.0]));
        assert_eq!(axpy(1.0, &v(&[1.0, 2.0]), &v(&[0.0, 0.0])).unwrap(), v(&[1.0, 2.0]));
        assert_eq!(axpy(2.0, &v(&[1.0, -1.0]), &v(&[1.0, 1.0])).unwrap(), v(&[3.0, -1.0]));
    }

    #[test]
    fn axpy_rejects_length_mismatch() {
        let err = axpy(1.0, &v(&[1.0]), &v(&[1.0, 2.0])).unwrap_err();
        assert_eq!(err, Error::Dimension { expected: 1, found: 2 });
    }

    #[test]
    fn axpy_rejects_overflow() {
        let err = axpy(f64::MAX, &v(&[f64::MAX]), &v(&[0.0])).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
    }

    #[test]
    fn construction_rejects_nan_and_empty() {
        assert!(DenseVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(DenseVector::new(vec![]).is_err());
    }

    #[test]
    fn norms() {
        let x = v(&[3.0, -4.0]);
        assert_eq!(x.norm2(), 5.0);
        assert_eq!(x.norm_inf(), 4.0);
        assert_eq!(x.distance(&v(&[0.0, 0.0])), 5.0);
    }
}
