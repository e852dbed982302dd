//! Maps from the Lie algebra back to the group: matrix exponential, Cayley
//! transform and Givens rotations.

use crate::error::{Error, Result};
use crate::manifold::{asymmetry, SkewSymmetric, TOL_SKEW};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExpBackend {
    /// Scaling and squaring with diagonal Pade approximants of degree 3 to 13.
    #[default]
    PadeScalingSquaring,
    /// `sum_{n <= T} A^n / n!` with no scaling. No orthogonality guarantee.
    TaylorTruncated(u32),
    /// Closed-form rotation; needs `d = 2` or support on a single 2x2 block.
    ClosedForm2x2,
}

/// Exponential of a skew-symmetric matrix.
pub fn matrix_exp(omega: &SkewSymmetric, backend: ExpBackend) -> Result<Matrix> {
    match backend {
        ExpBackend::PadeScalingSquaring => Ok(expm_pade(omega.matrix())),
        ExpBackend::TaylorTruncated(terms) => Ok(expm_taylor(omega.matrix(), terms)),
        ExpBackend::ClosedForm2x2 => expm_closed_form(omega),
    }
}

/// Exponential of a raw square matrix that is expected to be skew.
pub fn matrix_exp_checked(m: &Matrix, backend: ExpBackend) -> Result<Matrix> {
    let a = asymmetry(m);
    if !(a <= TOL_SKEW) {
        return Err(Error::NotSkew { asymmetry: a });
    }
    matrix_exp(&SkewSymmetric::antisymmetrize(m), backend)
}

const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.539_398_330_063_23e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068e0;
const THETA_13: f64 = 5.371920351148152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Scaling-and-squaring Pade exponential with Higham's degree selection.
pub fn expm_pade(a: &Matrix) -> Matrix {
    let n = a.rows();
    if n == 0 {
        return Matrix::zeros(0, 0);
    }
    let norm = a.norm_1();
    if norm == 0.0 {
        return Matrix::identity(n);
    }
    let mm = |x: &Matrix, y: &Matrix| x.matmul(y).expect("square");

    let (u, v, squarings) = if norm <= THETA_9 {
        let coeffs: &[f64] = if norm <= THETA_3 {
            &B3
        } else if norm <= THETA_5 {
            &B5
        } else if norm <= THETA_7 {
            &B7
        } else {
            &B9
        };
        let a2 = mm(a, a);
        // powers A^0, A^2, A^4, ...
        let mut even_powers = alloc::vec![Matrix::identity(n), a2.clone()];
        while 2 * (even_powers.len() - 1) < coeffs.len() - 1 {
            let next = mm(even_powers.last().unwrap(), &a2);
            even_powers.push(next);
        }
        let mut u_inner = Matrix::zeros(n, n);
        let mut v = Matrix::zeros(n, n);
        for (k, &b) in coeffs.iter().enumerate() {
            let p = &even_powers[k / 2];
            if k % 2 == 0 {
                v.axpy(b, p);
            } else {
                u_inner.axpy(b, p);
            }
        }
        (mm(a, &u_inner), v, 0)
    } else {
        let s = libm::ceil(libm::log2(norm / THETA_13)).max(0.0) as i32;
        let a = a.scale(libm::ldexp(1.0, -s));
        let b = &B13;
        let a2 = mm(&a, &a);
        let a4 = mm(&a2, &a2);
        let a6 = mm(&a4, &a2);
        let mut t = a6.scale(b[13]);
        t.axpy(b[11], &a4);
        t.axpy(b[9], &a2);
        let mut u_inner = mm(&a6, &t);
        u_inner.axpy(b[7], &a6);
        u_inner.axpy(b[5], &a4);
        u_inner.axpy(b[3], &a2);
        u_inner.add_identity(b[1]);
        let u = mm(&a, &u_inner);
        let mut t = a6.scale(b[12]);
        t.axpy(b[10], &a4);
        t.axpy(b[8], &a2);
        let mut v = mm(&a6, &t);
        v.axpy(b[6], &a6);
        v.axpy(b[4], &a4);
        v.axpy(b[2], &a2);
        v.add_identity(b[0]);
        (u, v, s)
    };

    let p = v.add(&u).expect("square");
    let q = v.sub(&u).expect("square");
    let mut r = q.solve(&p).expect("V - U is nonsingular for bounded norm");
    for _ in 0..squarings {
        r = mm(&r, &r);
    }
    r
}

/// Truncated Taylor series without scaling.
pub fn expm_taylor(a: &Matrix, terms: u32) -> Matrix {
    let n = a.rows();
    let mut sum = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    for k in 1..=terms {
        term = term.matmul(a).expect("square");
        term.scale_mut(1.0 / k as f64);
        sum.axpy(1.0, &term);
    }
    sum
}

fn expm_closed_form(omega: &SkewSymmetric) -> Result<Matrix> {
    let d = omega.d();
    let mut support = None;
    for (i, j, v) in omega.upper_entries() {
        if v != 0.0 {
            if support.is_some() {
                return Err(Error::ClosedFormUnsupported);
            }
            support = Some((i, j, v));
        }
    }
    match support {
        None => Ok(Matrix::identity(d)),
        Some((i, j, t)) => givens(d, i, j, t),
    }
}

/// Cayley transform `(I + Omega/2)^{-1} (I - Omega/2)`.
pub fn cayley(omega: &SkewSymmetric) -> Result<Matrix> {
    let half = omega.matrix().scale(0.5);
    let mut plus = half.clone();
    plus.add_identity(1.0);
    let mut minus = half.scale(-1.0);
    minus.add_identity(1.0);
    plus.solve(&minus)
}

/// The `t`-angle Givens rotation in the `(i, j)` plane:
/// `[i,i] = [j,j] = cos t`, `[i,j] = sin t`, `[j,i] = -sin t`.
pub fn givens(d: usize, i: usize, j: usize, t: f64) -> Result<Matrix> {
    if i >= j || j >= d {
        return Err(Error::InvalidIndex { i, j, d });
    }
    let (s, c) = libm::sincos(t);
    let mut g = Matrix::identity(d);
    g[(i, i)] = c;
    g[(j, j)] = c;
    g[(i, j)] = s;
    g[(j, i)] = -s;
    Ok(g)
}

/// `X <- G_{i,j}^t X`: rotates rows `i` and `j` in place.
#[inline]
pub fn rotate_rows(x: &mut Matrix, i: usize, j: usize, t: f64) {
    let (s, c) = libm::sincos(t);
    let (ri, rj) = x.two_rows_mut(i, j);
    for (a, b) in ri.iter_mut().zip(rj.iter_mut()) {
        let (xa, xb) = (*a, *b);
        *a = c * xa + s * xb;
        *b = -s * xa + c * xb;
    }
}

/// `X <- X G_{i,j}^t`: rotates columns `i` and `j` in place.
#[inline]
pub fn rotate_cols(x: &mut Matrix, i: usize, j: usize, t: f64) {
    let (s, c) = libm::sincos(t);
    let cols = x.cols();
    for row in x.as_mut_slice().chunks_exact_mut(cols) {
        let (xa, xb) = (row[i], row[j]);
        row[i] = c * xa - s * xb;
        row[j] = s * xa + c * xb;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::orthogonality_error;
    use crate::rng::seeded;
    use alloc::vec;

    #[test]
    fn exp_of_zero_is_identity() {
        for backend in [
            ExpBackend::PadeScalingSquaring,
            ExpBackend::TaylorTruncated(10),
            ExpBackend::ClosedForm2x2,
        ] {
            let e = matrix_exp(&SkewSymmetric::zeros(4), backend).unwrap();
            assert_eq!(e, Matrix::identity(4));
        }
        assert_eq!(cayley(&SkewSymmetric::zeros(3)).unwrap(), Matrix::identity(3));
    }

    #[test]
    fn exp_of_basis_is_givens() {
        let t = 0.7;
        let h = SkewSymmetric::basis(5, 1, 3).unwrap().scale(t);
        let g = givens(5, 1, 3, t).unwrap();
        for backend in [ExpBackend::PadeScalingSquaring, ExpBackend::ClosedForm2x2] {
            let e = matrix_exp(&h, backend).unwrap();
            assert!(e.max_abs_diff(&g) < 1e-14, "{backend:?}");
        }
        assert_eq!(g[(1, 1)], libm::cos(t));
        assert_eq!(g[(1, 3)], libm::sin(t));
        assert_eq!(g[(3, 1)], -libm::sin(t));
    }

    #[test]
    fn quarter_turn() {
        let g = givens(2, 0, 1, core::f64::consts::FRAC_PI_2).unwrap();
        let expected = Matrix::from_vec(2, 2, vec![0.0, 1.0, -1.0, 0.0]).unwrap();
        assert!(g.max_abs_diff(&expected) < 1e-16);
        assert_eq!(givens(4, 1, 2, 0.0).unwrap(), Matrix::identity(4));
        assert!(givens(3, 2, 2, 0.1).is_err());
        assert!(givens(3, 1, 3, 0.1).is_err());
    }

    #[test]
    fn givens_is_orthogonal() {
        let mut rng = seeded(3);
        for _ in 0..20 {
            let t: f64 = rand::Rng::random_range(&mut rng, -10.0..10.0);
            let g = givens(6, 2, 5, t).unwrap();
            assert!(orthogonality_error(&g) < 1e-15);
        }
    }

    #[test]
    fn pade_inverse_identity_and_taylor_crosscheck() {
        let mut rng = seeded(11);
        let omega = SkewSymmetric::random(6, &mut rng);
        let e = matrix_exp(&omega, ExpBackend::PadeScalingSquaring).unwrap();
        let einv = matrix_exp(&omega.neg(), ExpBackend::PadeScalingSquaring).unwrap();
        let prod = e.matmul(&einv).unwrap();
        assert!(prod.max_abs_diff(&Matrix::identity(6)) < 1e-11);
        let taylor = matrix_exp(&omega, ExpBackend::TaylorTruncated(200)).unwrap();
        assert!(e.sub(&taylor).unwrap().frobenius_norm() < 1e-9);
        let det = e.determinant().unwrap();
        assert!((det - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pade_covers_every_degree() {
        // norms straddling each degree threshold, including the scaled branch
        let mut rng = seeded(12);
        let base = SkewSymmetric::random(5, &mut rng);
        let n1 = base.matrix().norm_1();
        for target in [1e-3, 0.1, 0.5, 1.5, 4.0, 40.0] {
            let omega = base.scale(target / n1);
            let e = matrix_exp(&omega, ExpBackend::PadeScalingSquaring).unwrap();
            let reference = expm_taylor_scaled(omega.matrix());
            assert!(e.max_abs_diff(&reference) < 1e-12 * (1.0 + target), "norm {target}");
            assert!(orthogonality_error(&e) < 1e-12);
        }
    }

    // Independent reference: Taylor series on A / 2^k followed by k squarings.
    fn expm_taylor_scaled(a: &Matrix) -> Matrix {
        let k = 10;
        let small = a.scale(1.0 / (1u64 << k) as f64);
        let mut r = expm_taylor(&small, 30);
        for _ in 0..k {
            r = r.matmul(&r).unwrap();
        }
        r
    }

    #[test]
    fn closed_form_rejects_wide_support() {
        let mut rng = seeded(4);
        let omega = SkewSymmetric::random(3, &mut rng);
        assert_eq!(
            matrix_exp(&omega, ExpBackend::ClosedForm2x2),
            Err(Error::ClosedFormUnsupported)
        );
        let two = SkewSymmetric::random(2, &mut rng);
        let e = matrix_exp(&two, ExpBackend::ClosedForm2x2).unwrap();
        let p = matrix_exp(&two, ExpBackend::PadeScalingSquaring).unwrap();
        assert!(e.max_abs_diff(&p) < 1e-14);
    }

    #[test]
    fn non_skew_input_rejected() {
        let m = Matrix::from_vec(2, 2, vec![0.0, 1.0, 0.5, 0.0]).unwrap();
        assert!(matches!(
            matrix_exp_checked(&m, ExpBackend::PadeScalingSquaring),
            Err(Error::NotSkew { .. })
        ));
    }

    #[test]
    fn cayley_inverse_identity() {
        let mut rng = seeded(5);
        let omega = SkewSymmetric::random(5, &mut rng);
        let y = cayley(&omega).unwrap();
        let yinv = cayley(&omega.neg()).unwrap();
        assert!(y.matmul(&yinv).unwrap().max_abs_diff(&Matrix::identity(5)) < 1e-11);
        assert!(orthogonality_error(&y) < 1e-11);
    }

    #[test]
    fn cayley_agrees_with_exp_to_first_order() {
        let mut rng = seeded(6);
        let omega = SkewSymmetric::random(5, &mut rng);
        let gap = |eta: f64| {
            let y = cayley(&omega.scale(-eta)).unwrap();
            let e = matrix_exp(&omega.scale(eta), ExpBackend::PadeScalingSquaring).unwrap();
            y.sub(&e).unwrap().frobenius_norm()
        };
        let ratio = gap(1e-2) / gap(1e-3);
        // the gap is O(eta^2) iff it shrinks by at least ~100 per decade; a sign
        // error would leave an O(eta) gap and a ratio near 10
        assert!(ratio > 50.0, "ratio {ratio}");
        let wrong_sign = cayley(&omega.scale(1e-3)).unwrap();
        let e = matrix_exp(&omega.scale(1e-3), ExpBackend::PadeScalingSquaring).unwrap();
        assert!(wrong_sign.sub(&e).unwrap().frobenius_norm() > 1e3 * gap(1e-3));
    }

    #[test]
    fn in_place_rotations_match_dense_products() {
        let mut rng = seeded(7);
        let x = crate::manifold::random_orthogonal(5, &mut rng);
        let g = givens(5, 1, 4, 0.3).unwrap();
        let mut left = x.matrix().clone();
        rotate_rows(&mut left, 1, 4, 0.3);
        assert!(left.max_abs_diff(&g.matmul(x.matrix()).unwrap()) < 1e-15);
        let mut right = x.matrix().clone();
        rotate_cols(&mut right, 1, 4, 0.3);
        assert!(right.max_abs_diff(&x.matrix().matmul(&g).unwrap()) < 1e-15);
    }
}
