//! Smooth test objectives with analytic ambient gradients.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// A smooth function on `d x k` matrices. The optimizer ascends it.
pub trait Objective {
    fn value(&self, x: &Matrix) -> f64;
    /// Euclidean gradient `dF/dX`, same shape as `x`.
    fn gradient(&self, x: &Matrix) -> Matrix;
}

/// Wraps a pair of closures as an [`Objective`].
pub struct FnObjective<V, G> {
    value: V,
    gradient: G,
}

impl<V: Fn(&Matrix) -> f64, G: Fn(&Matrix) -> Matrix> FnObjective<V, G> {
    pub fn new(value: V, gradient: G) -> Self {
        Self { value, gradient }
    }
}

impl<V: Fn(&Matrix) -> f64, G: Fn(&Matrix) -> Matrix> Objective for FnObjective<V, G> {
    fn value(&self, x: &Matrix) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &Matrix) -> Matrix {
        (self.gradient)(x)
    }
}

/// `F(X) = tr(A^T X)`. Over `O(d)` the maximum is the sum of the singular
/// values of `A`, attained at the polar factor.
#[derive(Debug, Clone, PartialEq)]
pub struct Procrustes {
    target: Matrix,
}

impl Procrustes {
    pub fn new(target: Matrix) -> Self {
        Self { target }
    }

    pub fn target(&self) -> &Matrix {
        &self.target
    }
}

impl Objective for Procrustes {
    fn value(&self, x: &Matrix) -> f64 {
        self.target.inner(x)
    }

    fn gradient(&self, _x: &Matrix) -> Matrix {
        self.target.clone()
    }
}

/// `F(X) = -tr(N X^T Q X) / 2` for diagonal `N`, `Q`. Its reverse-form
/// generator `X^T G - G^T X` is the sorting generator `N S - S N`, `S = X^T Q X`.
#[derive(Debug, Clone, PartialEq)]
pub struct SortingPotential {
    n: Vec<f64>,
    q: Vec<f64>,
}

impl SortingPotential {
    pub fn new(n: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if n.len() != q.len() {
            return Err(Error::DimensionMismatch { op: "SortingPotential", expected: (n.len(), 1), found: (q.len(), 1) });
        }
        Ok(Self { n, q })
    }
}

impl Objective for SortingPotential {
    fn value(&self, x: &Matrix) -> f64 {
        let mut total = 0.0;
        for r in 0..x.rows() {
            for (c, &nc) in self.n.iter().enumerate() {
                total += nc * self.q[r] * x[(r, c)] * x[(r, c)];
            }
        }
        -0.5 * total
    }

    fn gradient(&self, x: &Matrix) -> Matrix {
        Matrix::from_fn(x.rows(), x.cols(), |r, c| -self.q[r] * x[(r, c)] * self.n[c])
    }
}
