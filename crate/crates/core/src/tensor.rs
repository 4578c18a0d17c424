//! Numeric tensors at a point with an explicit variance per axis.

use ndarray::{ArrayD, IxDyn};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variance {
    Upper,
    Lower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorValue {
    pub variance: Vec<Variance>,
    pub data: ArrayD<f64>,
}

impl TensorValue {
    pub fn new(variance: Vec<Variance>, data: ArrayD<f64>) -> Self {
        assert_eq!(variance.len(), data.ndim(), "variance/rank mismatch");
        TensorValue { variance, data }
    }

    pub fn zeros(variance: Vec<Variance>, n: usize) -> Self {
        let shape = vec![n; variance.len()];
        TensorValue {
            variance,
            data: ArrayD::zeros(IxDyn(&shape)),
        }
    }

    pub fn rank(&self) -> (usize, usize) {
        let up = self.variance.iter().filter(|v| **v == Variance::Upper).count();
        (up, self.variance.len() - up)
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(self.data.iter().copied())
    }
}

pub fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Largest absolute componentwise difference of two equally shaped arrays.
pub fn max_abs_diff<'a, D: ndarray::Dimension>(
    a: &'a ndarray::Array<f64, D>,
    b: &'a ndarray::Array<f64, D>,
) -> f64 {
    assert_eq!(a.shape(), b.shape());
    max_abs(a.iter().zip(b.iter()).map(|(x, y)| x - y))
}

pub fn kronecker(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}
