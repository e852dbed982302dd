//! Points, tangent objects and Riemannian gradients on `O(d)`, `SO(d)` and `ST(d, k)`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};
use crate::rng::standard_normal;

/// Orthogonality tolerance for points that may carry accumulated drift.
pub const TOL_ORTH: f64 = 1e-9;
/// Largest asymmetry `max |A + A^T|` (relative to `max(1, max |A|)`) accepted as skew.
pub const TOL_SKEW: f64 = 1e-12;
/// Determinant tolerance for `SO(d)` membership.
pub const TOL_DET: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManifoldKind {
    Orthogonal,
    SpecialOrthogonal,
    Stiefel,
}

/// A `d x k` matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldPoint {
    data: Matrix,
    kind: ManifoldKind,
}

impl ManifoldPoint {
    /// Validates orthonormality (and the determinant for `SO(d)`).
    pub fn new(data: Matrix, kind: ManifoldKind) -> Result<Self> {
        let (d, k) = data.shape();
        if d == 0 || k == 0 || k > d {
            return Err(Error::DimensionMismatch {
                op: "ManifoldPoint::new",
                expected: (d, d.max(1)),
                found: (d, k),
            });
        }
        if kind != ManifoldKind::Stiefel && k != d {
            return Err(Error::DimensionMismatch {
                op: "ManifoldPoint::new",
                expected: (d, d),
                found: (d, k),
            });
        }
        let error = stiefel_error(&data);
        if !(error <= TOL_ORTH) {
            return Err(Error::NotOnManifold { error });
        }
        if kind == ManifoldKind::SpecialOrthogonal {
            let det = data.determinant()?;
            if (det - 1.0).abs() > TOL_DET {
                return Err(Error::WrongDeterminant { det });
            }
        }
        Ok(Self { data, kind })
    }

    /// Skips validation. Used for iterates produced by orthogonality-preserving updates.
    pub(crate) fn new_unchecked(data: Matrix, kind: ManifoldKind) -> Self {
        Self { data, kind }
    }

    pub fn identity(d: usize) -> Self {
        Self::new_unchecked(Matrix::identity(d), ManifoldKind::Orthogonal)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.data
    }

    pub fn into_matrix(self) -> Matrix {
        self.data
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    pub fn d(&self) -> usize {
        self.data.rows()
    }

    pub fn k(&self) -> usize {
        self.data.cols()
    }

    pub(crate) fn with_matrix(&self, data: Matrix) -> Self {
        Self::new_unchecked(data, self.kind)
    }
}

/// A dense skew-symmetric `d x d` matrix; the diagonal is exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewSymmetric {
    data: Matrix,
}

impl SkewSymmetric {
    pub fn zeros(d: usize) -> Self {
        Self { data: Matrix::zeros(d, d) }
    }

    /// Accepts `m` if it is skew up to [`TOL_SKEW`] and scrubs the residual asymmetry.
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                op: "SkewSymmetric::new",
                expected: (m.rows(), m.rows()),
                found: m.shape(),
            });
        }
        let asymmetry = asymmetry(&m);
        if !(asymmetry <= TOL_SKEW) {
            return Err(Error::NotSkew { asymmetry });
        }
        Ok(Self::antisymmetrize(&m))
    }

    /// `(m - m^T) / 2`.
    pub fn antisymmetrize(m: &Matrix) -> Self {
        let d = m.rows();
        let mut data = Matrix::zeros(d, d);
        for i in 0..d {
            for j in i + 1..d {
                let v = 0.5 * (m[(i, j)] - m[(j, i)]);
                data[(i, j)] = v;
                data[(j, i)] = -v;
            }
        }
        Self { data }
    }

    /// Builds the matrix from its strict upper triangle.
    pub fn from_upper(d: usize, mut upper: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Matrix::zeros(d, d);
        for i in 0..d {
            for j in i + 1..d {
                let v = upper(i, j);
                data[(i, j)] = v;
                data[(j, i)] = -v;
            }
        }
        Self { data }
    }

    /// Basis element `H_{i,j}`: `+1` at `(i, j)`, `-1` at `(j, i)`.
    pub fn basis(d: usize, i: usize, j: usize) -> Result<Self> {
        if i >= j || j >= d {
            return Err(Error::InvalidIndex { i, j, d });
        }
        let mut data = Matrix::zeros(d, d);
        data[(i, j)] = 1.0;
        data[(j, i)] = -1.0;
        Ok(Self { data })
    }

    /// Upper-triangle entries drawn iid standard normal.
    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        Self::from_upper(d, |_, _| standard_normal(rng))
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.data.rows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    pub fn matrix(&self) -> &Matrix {
        &self.data
    }

    pub fn into_matrix(self) -> Matrix {
        self.data
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { data: self.data.scale(c) }
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn add(&self, other: &SkewSymmetric) -> Result<Self> {
        Ok(Self { data: self.data.add(&other.data)? })
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.frobenius_norm_sq()
    }

    pub fn is_zero(&self) -> bool {
        self.data.as_slice().iter().all(|x| *x == 0.0)
    }

    /// Strict upper-triangle entries `(i, j, value)` in row-major order.
    pub fn upper_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let d = self.d();
        (0..d).flat_map(move |i| (i + 1..d).map(move |j| (i, j, self.data[(i, j)])))
    }
}

/// `max |m + m^T|` relative to `max(1, max |m|)`.
pub fn asymmetry(m: &Matrix) -> f64 {
    let d = m.rows();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in i..d {
            worst = worst.max((m[(i, j)] + m[(j, i)]).abs());
        }
    }
    worst / m.max_abs().max(1.0)
}

/// An unconstrained Euclidean gradient `G` at a `d x k` point.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientGradient {
    data: Matrix,
}

impl AmbientGradient {
    pub fn new(data: Matrix) -> Self {
        Self { data }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.data
    }
}

impl From<Matrix> for AmbientGradient {
    fn from(m: Matrix) -> Self {
        Self::new(m)
    }
}

/// Which side the skew generator acts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientForm {
    /// `Omega = G X^T - X G^T`, updates act as `Gamma(eta Omega) X`.
    Standard,
    /// `Omega = X^T G - G^T X` (square points only), updates act as `X Gamma(eta Omega)`.
    Reverse,
}

fn check_shapes(x: &ManifoldPoint, g: &AmbientGradient, op: &'static str) -> Result<()> {
    if x.matrix().shape() != g.matrix().shape() {
        return Err(Error::DimensionMismatch {
            op,
            expected: x.matrix().shape(),
            found: g.matrix().shape(),
        });
    }
    Ok(())
}

/// The skew generator of the Riemannian gradient.
pub fn riemannian_skew(x: &ManifoldPoint, g: &AmbientGradient, form: GradientForm) -> Result<SkewSymmetric> {
    check_shapes(x, g, "riemannian_skew")?;
    let (xm, gm) = (x.matrix(), g.matrix());
    match form {
        GradientForm::Standard => {
            let gxt = gm.matmul_tr(xm)?;
            Ok(SkewSymmetric::antisymmetrize(&gxt.scale(2.0)))
        }
        GradientForm::Reverse => {
            if x.k() != x.d() {
                return Err(Error::ReverseFormNotSquare { d: x.d(), k: x.k() });
            }
            let xtg = xm.tr_matmul(gm)?;
            Ok(SkewSymmetric::antisymmetrize(&xtg.scale(2.0)))
        }
    }
}

/// A single entry `(G X^T - X G^T)[i, j]`, in `O(k)` time.
#[inline]
pub fn riemannian_skew_entry(x: &Matrix, g: &Matrix, i: usize, j: usize) -> f64 {
    dot(g.row(i), x.row(j)) - dot(x.row(i), g.row(j))
}

/// Riemannian gradient `Omega X` with `Omega = G X^T - X G^T`.
pub fn riemannian_gradient(x: &ManifoldPoint, g: &AmbientGradient) -> Result<Matrix> {
    let omega = riemannian_skew(x, g, GradientForm::Standard)?;
    omega.matrix().matmul(x.matrix())
}

/// Canonical metric `tr(Z1^T (I - X X^T / 2) Z2)` on the tangent space at `x`.
pub fn canonical_inner(x: &ManifoldPoint, z1: &Matrix, z2: &Matrix) -> Result<f64> {
    let xm = x.matrix();
    let xt_z2 = xm.tr_matmul(z2)?;
    let proj = xm.matmul(&xt_z2)?;
    Ok(z1.inner(z2) - 0.5 * z1.inner(&proj))
}

/// `||X X^T - I_d||_F` for square `x`, `||X^T X - I_k||_F` otherwise.
pub fn orthogonality_error(x: &Matrix) -> f64 {
    if x.is_square() {
        let mut g = x.matmul_tr(x).expect("square");
        g.add_identity(-1.0);
        g.frobenius_norm()
    } else {
        stiefel_error(x)
    }
}

fn stiefel_error(x: &Matrix) -> f64 {
    let mut g = x.tr_matmul(x).expect("shape");
    g.add_identity(-1.0);
    g.frobenius_norm()
}

/// Modified Gram-Schmidt on the rows of a square matrix, followed by row
/// renormalisation. A second sweep restores orthogonality lost to cancellation.
pub fn project_orthogonal(m: &Matrix) -> Result<ManifoldPoint> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            op: "project_orthogonal",
            expected: (m.rows(), m.rows()),
            found: m.shape(),
        });
    }
    let d = m.rows();
    let mut q = m.clone();
    for i in 0..d {
        let scale = libm::sqrt(dot(m.row(i), m.row(i)));
        for _sweep in 0..2 {
            for j in 0..i {
                let (qj, qi) = q.two_rows_mut(j, i);
                let c = dot(qi, qj);
                for (a, b) in qi.iter_mut().zip(qj.iter()) {
                    *a -= c * b;
                }
            }
        }
        let norm = libm::sqrt(dot(q.row(i), q.row(i)));
        if !(norm > 1e-12 * scale.max(f64::MIN_POSITIVE)) || norm <= 1e-300 {
            return Err(Error::RankDeficient { pivot: norm });
        }
        q.row_mut(i).iter_mut().for_each(|a| *a /= norm);
    }
    Ok(ManifoldPoint::new_unchecked(q, ManifoldKind::Orthogonal))
}

/// Gaussian matrix pushed through [`project_orthogonal`].
pub fn random_orthogonal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ManifoldPoint {
    assert!(d >= 1, "dimension must be positive");
    loop {
        let g = Matrix::from_fn(d, d, |_, _| standard_normal(rng));
        if let Ok(p) = project_orthogonal(&g) {
            return p;
        }
    }
}

/// Random point of `ST(d, k)`: the first `k` columns of a random orthogonal matrix.
pub fn random_stiefel<R: Rng + ?Sized>(d: usize, k: usize, rng: &mut R) -> ManifoldPoint {
    assert!(k >= 1 && k <= d, "need 1 <= k <= d");
    let full = random_orthogonal(d, rng);
    let m = Matrix::from_fn(d, k, |i, j| full.matrix()[(i, j)]);
    ManifoldPoint::new_unchecked(m, ManifoldKind::Stiefel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use alloc::vec;

    fn naive_skew(x: &Matrix, g: &Matrix) -> Matrix {
        let (d, k) = x.shape();
        Matrix::from_fn(d, d, |i, j| {
            let mut s = 0.0;
            for t in 0..k {
                s += g[(i, t)] * x[(j, t)] - x[(i, t)] * g[(j, t)];
            }
            s
        })
    }

    #[test]
    fn zero_gradient_gives_zero_skew() {
        let x = ManifoldPoint::identity(3);
        let g = AmbientGradient::new(Matrix::zeros(3, 3));
        assert!(riemannian_skew(&x, &g, GradientForm::Standard).unwrap().is_zero());
        assert!(riemannian_gradient(&x, &g).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn identity_point_gives_g_minus_gt() {
        let mut rng = seeded(1);
        let d = 5;
        let gm = Matrix::from_fn(d, d, |_, _| standard_normal(&mut rng));
        let x = ManifoldPoint::identity(d);
        let g = AmbientGradient::new(gm.clone());
        let expected = gm.sub(&gm.transpose()).unwrap();
        let omega = riemannian_skew(&x, &g, GradientForm::Standard).unwrap();
        assert!(omega.matrix().max_abs_diff(&expected) < 1e-15);
        let rg = riemannian_gradient(&x, &g).unwrap();
        assert!(rg.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn stiefel_skew_matches_triple_loop() {
        let mut rng = seeded(2);
        let x = random_stiefel(4, 2, &mut rng);
        let gm = Matrix::from_fn(4, 2, |_, _| standard_normal(&mut rng));
        let g = AmbientGradient::new(gm.clone());
        let omega = riemannian_skew(&x, &g, GradientForm::Standard).unwrap();
        assert!(omega.matrix().max_abs_diff(&naive_skew(x.matrix(), &gm)) < 1e-12);
        for i in 0..4 {
            assert_eq!(omega.get(i, i), 0.0);
            for j in 0..4 {
                assert_eq!(omega.get(i, j), -omega.get(j, i));
                let e = riemannian_skew_entry(x.matrix(), &gm, i, j);
                assert!((e - omega.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reverse_form_requires_square() {
        let mut rng = seeded(3);
        let x = random_stiefel(4, 2, &mut rng);
        let g = AmbientGradient::new(Matrix::zeros(4, 2));
        assert_eq!(
            riemannian_skew(&x, &g, GradientForm::Reverse),
            Err(Error::ReverseFormNotSquare { d: 4, k: 2 })
        );
        let bad = AmbientGradient::new(Matrix::zeros(3, 2));
        assert!(matches!(
            riemannian_skew(&x, &bad, GradientForm::Standard),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn riemannian_gradient_is_tangent() {
        let mut rng = seeded(4);
        let x = random_orthogonal(5, &mut rng);
        let gm = Matrix::from_fn(5, 5, |_, _| standard_normal(&mut rng));
        let r = riemannian_gradient(&x, &gm.into()).unwrap();
        let xtr = x.matrix().tr_matmul(&r).unwrap();
        let s = xtr.add(&xtr.transpose()).unwrap();
        assert!(s.max_abs() < 1e-12);
    }

    #[test]
    fn orthogonality_error_examples() {
        assert_eq!(orthogonality_error(&Matrix::identity(4)), 0.0);
        let two = Matrix::identity(4).scale(2.0);
        assert!((orthogonality_error(&two) - 6.0).abs() < 1e-15);
        let tall = Matrix::eye(5, 2).scale(2.0);
        assert!((orthogonality_error(&tall) - 3.0 * libm::sqrt(2.0)).abs() < 1e-15);
    }

    #[test]
    fn projection_examples() {
        let q = project_orthogonal(&Matrix::diagonal(&[2.0, 3.0])).unwrap();
        assert!(q.matrix().max_abs_diff(&Matrix::identity(2)) < 1e-15);

        let mut rng = seeded(5);
        let x = random_orthogonal(6, &mut rng);
        let again = project_orthogonal(x.matrix()).unwrap();
        assert!(again.matrix().max_abs_diff(x.matrix()) < 1e-12);

        let g = Matrix::from_fn(8, 8, |_, _| standard_normal(&mut rng));
        let p = project_orthogonal(&g).unwrap();
        assert!(orthogonality_error(p.matrix()) <= 1e-12);

        let singular = Matrix::from_vec(2, 2, vec![1.0, 2.0, 2.0, 4.0]).unwrap();
        assert!(matches!(project_orthogonal(&singular), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn random_orthogonal_examples() {
        for seed in 0..5 {
            let x = random_orthogonal(1, &mut seeded(seed));
            assert_eq!(x.matrix()[(0, 0)].abs(), 1.0);
        }
        let a = random_orthogonal(16, &mut seeded(9));
        let b = random_orthogonal(16, &mut seeded(9));
        assert_eq!(a, b);
        assert!(orthogonality_error(a.matrix()) <= 1e-12);
    }

    #[test]
    fn point_validation() {
        assert!(ManifoldPoint::new(Matrix::identity(3), ManifoldKind::SpecialOrthogonal).is_ok());
        let flip = Matrix::diagonal(&[1.0, 1.0, -1.0]);
        assert!(matches!(
            ManifoldPoint::new(flip.clone(), ManifoldKind::SpecialOrthogonal),
            Err(Error::WrongDeterminant { .. })
        ));
        assert!(ManifoldPoint::new(flip, ManifoldKind::Orthogonal).is_ok());
        assert!(matches!(
            ManifoldPoint::new(Matrix::identity(3).scale(1.1), ManifoldKind::Orthogonal),
            Err(Error::NotOnManifold { .. })
        ));
        assert!(ManifoldPoint::new(Matrix::eye(4, 2), ManifoldKind::Stiefel).is_ok());
        assert!(ManifoldPoint::new(Matrix::eye(4, 2), ManifoldKind::Orthogonal).is_err());
    }

    #[test]
    fn skew_validation() {
        let m = Matrix::from_vec(2, 2, vec![0.0, 1.0, -1.0 + 1e-14, 0.0]).unwrap();
        let s = SkewSymmetric::new(m).unwrap();
        assert_eq!(s.get(0, 1), -s.get(1, 0));
        let bad = Matrix::from_vec(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(matches!(SkewSymmetric::new(bad), Err(Error::NotSkew { .. })));
        let h = SkewSymmetric::basis(3, 0, 2).unwrap();
        assert_eq!(h.get(0, 2), 1.0);
        assert_eq!(h.get(2, 0), -1.0);
        assert!(SkewSymmetric::basis(3, 2, 1).is_err());
    }
}
