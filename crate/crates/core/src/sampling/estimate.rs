use alloc::vec::Vec;

use crate::manifold::SkewSymmetric;
use crate::matrix::Matrix;

/// Read access to the entries of a skew-symmetric matrix.
///
/// Samplers only look at the entries on the edges they keep, so callers can
/// hand in a lazily evaluated `Omega` and avoid forming the dense matrix.
pub trait SkewEntries {
    fn dim(&self) -> usize;
    fn entry(&self, i: usize, j: usize) -> f64;
}

impl SkewEntries for SkewSymmetric {
    #[inline]
    fn dim(&self) -> usize {
        self.d()
    }

    #[inline]
    fn entry(&self, i: usize, j: usize) -> f64 {
        self.get(i, j)
    }
}

/// Entries computed on demand from a closure over the upper triangle.
pub struct LazySkew<F> {
    d: usize,
    upper: F,
}

impl<F: Fn(usize, usize) -> f64> LazySkew<F> {
    /// `upper(i, j)` is only called with `i < j`.
    pub fn new(d: usize, upper: F) -> Self {
        Self { d, upper }
    }
}

impl<F: Fn(usize, usize) -> f64> SkewEntries for LazySkew<F> {
    fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    fn entry(&self, i: usize, j: usize) -> f64 {
        use core::cmp::Ordering::*;
        match i.cmp(&j) {
            Less => (self.upper)(i, j),
            Greater => -(self.upper)(j, i),
            Equal => 0.0,
        }
    }
}

/// One connected component of a sampled sub-tournament: its vertices and the
/// restriction of `Omega` to them.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateBlock {
    vertices: Vec<usize>,
    data: Matrix,
}

impl EstimateBlock {
    pub fn restrict<E: SkewEntries + ?Sized>(omega: &E, vertices: Vec<usize>) -> Self {
        let s = vertices.len();
        let mut data = Matrix::zeros(s, s);
        for a in 0..s {
            for b in a + 1..s {
                let v = omega.entry(vertices[a], vertices[b]);
                data[(a, b)] = v;
                data[(b, a)] = -v;
            }
        }
        Self { vertices, data }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// The `s x s` skew restriction, before scaling.
    pub fn data(&self) -> &Matrix {
        &self.data
    }
}

/// A sampled estimate `scale * sum_k embed(block_k)` of `Omega`.
///
/// Blocks have pairwise disjoint vertex sets, so their embeddings commute.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewEstimate {
    d: usize,
    blocks: Vec<EstimateBlock>,
    scale: f64,
}

impl SkewEstimate {
    pub(crate) fn new(d: usize, blocks: Vec<EstimateBlock>, scale: f64) -> Self {
        debug_assert!(scale > 0.0 && scale.is_finite());
        debug_assert!(blocks.iter().all(|b| b.vertices.iter().all(|&v| v < d)));
        Self { d, blocks, scale }
    }

    /// The estimate that is `Omega` itself: one block holding every vertex.
    pub fn exact<E: SkewEntries + ?Sized>(omega: &E) -> Self {
        let d = omega.dim();
        let block = EstimateBlock::restrict(omega, (0..d).collect());
        Self::new(d, alloc::vec![block], 1.0)
    }

    pub fn zero(d: usize) -> Self {
        Self::new(d, Vec::new(), 1.0)
    }

    /// Keeps the edges of `matching` (pairs `i < j`), each as its own 2-vertex block.
    pub fn from_matching<E: SkewEntries + ?Sized>(omega: &E, matching: &[(usize, usize)], scale: f64) -> Self {
        let blocks = matching
            .iter()
            .map(|&(i, j)| EstimateBlock::restrict(omega, alloc::vec![i, j]))
            .collect();
        Self::new(omega.dim(), blocks, scale)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn blocks(&self) -> &[EstimateBlock] {
        &self.blocks
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// The vertex partition spanned by the blocks, when they form one.
    pub fn partition(&self) -> Option<super::VertexPartition> {
        super::VertexPartition::new(self.d, self.blocks.iter().map(|b| b.vertices.clone()).collect()).ok()
    }

    /// Dense realisation `scale * sum_k embed(block_k)`.
    pub fn densify(&self) -> SkewSymmetric {
        let mut m = Matrix::zeros(self.d, self.d);
        for block in &self.blocks {
            let v = &block.vertices;
            for a in 0..v.len() {
                for b in 0..v.len() {
                    m[(v[a], v[b])] = self.scale * block.data[(a, b)];
                }
            }
        }
        SkewSymmetric::antisymmetrize(&m)
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(|b| b.data.as_slice().iter().all(|x| *x == 0.0))
    }
}
