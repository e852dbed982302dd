//! Discretized gradient flows: exact and sampled update steps, the optimizer
//! loop and estimator statistics.

use alloc::boxed::Box;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::manifold::{orthogonality_error, riemannian_skew, AmbientGradient, GradientForm, ManifoldPoint, SkewSymmetric};
use crate::matrix::Matrix;
use crate::objective::Objective;
use crate::retraction::{cayley, expm_pade, rotate_cols, rotate_rows};
use crate::sampling::{
    build_nonintersecting_family, h_regular_sample, importance_sample_family, sample_uniform_partition,
    uniform_estimate, FamilyDistribution, FamilyStrategy, RejectionVersion, SkewEntries, SkewEstimate,
    WeightFunction,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize {
    Constant(f64),
    /// `eta_0 / sqrt(i + 1)` at iteration `i`.
    InvSqrt(f64),
}

impl StepSize {
    pub fn base(&self) -> f64 {
        match *self {
            StepSize::Constant(e) | StepSize::InvSqrt(e) => e,
        }
    }

    pub fn at(&self, i: usize) -> f64 {
        match *self {
            StepSize::Constant(e) => e,
            StepSize::InvSqrt(e) => e / libm::sqrt(i as f64 + 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Retraction {
    #[default]
    Exp,
    /// Steps with `Y(-eta Omega)` so that it agrees with `exp(eta Omega)` to first order.
    Cayley,
}

/// Source of the skew matrix used at each step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SamplerSpec {
    Exact,
    UniformPartition { s: usize },
    HRegular { s: usize, h: WeightFunction, version: RejectionVersion, max_trials: u64 },
    Family { strategy: FamilyStrategy, distribution: FamilyDistribution },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    pub step: StepSize,
    pub retraction: Retraction,
    pub sampler: SamplerSpec,
}

impl StepConfig {
    pub fn new(step: StepSize, retraction: Retraction, sampler: SamplerSpec) -> Result<Self> {
        let eta = step.base();
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidStepSize { eta });
        }
        Ok(Self { step, retraction, sampler })
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::InvalidStepSize { eta });
    }
    Ok(())
}

/// `Gamma(eta Omega)`: `exp(eta Omega)` or `Y(-eta Omega)`.
pub fn retract(omega: &Matrix, eta: f64, retraction: Retraction) -> Result<Matrix> {
    match retraction {
        Retraction::Exp => Ok(expm_pade(&omega.scale(eta))),
        Retraction::Cayley => cayley(&SkewSymmetric::antisymmetrize(&omega.scale(-eta))),
    }
}

/// `X' = Gamma(eta Omega) X` with `Omega = G X^T - X G^T`.
pub fn exact_step(x: &ManifoldPoint, g: &AmbientGradient, eta: f64, retraction: Retraction) -> Result<ManifoldPoint> {
    check_eta(eta)?;
    let omega = riemannian_skew(x, g, GradientForm::Standard)?;
    exact_step_skew(x, &omega, eta, retraction, GradientForm::Standard)
}

/// Applies a dense generator: `Gamma(eta Omega) X` (standard) or `X Gamma(eta Omega)` (reverse).
pub fn exact_step_skew(
    x: &ManifoldPoint,
    omega: &SkewSymmetric,
    eta: f64,
    retraction: Retraction,
    form: GradientForm,
) -> Result<ManifoldPoint> {
    check_eta(eta)?;
    let side = side_dim(x, form)?;
    if omega.d() != side {
        return Err(Error::DimensionMismatch { op: "exact_step", expected: (side, side), found: (omega.d(), omega.d()) });
    }
    if eta == 0.0 {
        return Ok(x.clone());
    }
    let gamma = retract(omega.matrix(), eta, retraction)?;
    let next = match form {
        GradientForm::Standard => gamma.matmul(x.matrix())?,
        GradientForm::Reverse => x.matrix().matmul(&gamma)?,
    };
    Ok(x.with_matrix(next))
}

fn side_dim(x: &ManifoldPoint, form: GradientForm) -> Result<usize> {
    match form {
        GradientForm::Standard => Ok(x.d()),
        GradientForm::Reverse if x.k() == x.d() => Ok(x.d()),
        GradientForm::Reverse => Err(Error::ReverseFormNotSquare { d: x.d(), k: x.k() }),
    }
}

/// `X' = Gamma(eta Omega_hat) X`, one small exponential per block.
pub fn stochastic_step(x: &ManifoldPoint, estimate: &SkewEstimate, eta: f64) -> Result<ManifoldPoint> {
    let mut m = x.matrix().clone();
    apply_estimate(&mut m, estimate, eta, Retraction::Exp, GradientForm::Standard)?;
    Ok(x.with_matrix(m))
}

/// In-place block-factorized update. Blocks act on disjoint rows (standard
/// form) or columns (reverse form), so they are applied one after another.
/// Two-vertex blocks are closed-form Givens rotations.
pub fn apply_estimate(
    x: &mut Matrix,
    estimate: &SkewEstimate,
    eta: f64,
    retraction: Retraction,
    form: GradientForm,
) -> Result<()> {
    check_eta(eta)?;
    let side = match form {
        GradientForm::Standard => x.rows(),
        GradientForm::Reverse if x.is_square() => x.cols(),
        GradientForm::Reverse => return Err(Error::ReverseFormNotSquare { d: x.rows(), k: x.cols() }),
    };
    if estimate.d() != side {
        return Err(Error::DimensionMismatch {
            op: "stochastic_step",
            expected: (side, side),
            found: (estimate.d(), estimate.d()),
        });
    }
    if eta == 0.0 {
        return Ok(());
    }
    let c = eta * estimate.scale();
    for block in estimate.blocks() {
        let v = block.vertices();
        if v.len() == 2 {
            let theta = c * block.data()[(0, 1)];
            let t = match retraction {
                Retraction::Exp => theta,
                Retraction::Cayley => 2.0 * libm::atan(theta / 2.0),
            };
            match form {
                GradientForm::Standard => rotate_rows(x, v[0], v[1], t),
                GradientForm::Reverse => rotate_cols(x, v[0], v[1], t),
            }
        } else if v.len() > 2 {
            let e = retract(block.data(), c, retraction)?;
            match form {
                GradientForm::Standard => mix_rows(x, v, &e),
                GradientForm::Reverse => mix_cols(x, v, &e),
            }
        }
    }
    Ok(())
}

/// `X[v, :] <- E X[v, :]`.
fn mix_rows(x: &mut Matrix, v: &[usize], e: &Matrix) {
    let k = x.cols();
    let s = v.len();
    let mut old = Vec::with_capacity(s * k);
    for &r in v {
        old.extend_from_slice(x.row(r));
    }
    for (a, &r) in v.iter().enumerate() {
        let row = x.row_mut(r);
        row.iter_mut().for_each(|z| *z = 0.0);
        for b in 0..s {
            let w = e[(a, b)];
            for (z, o) in row.iter_mut().zip(&old[b * k..(b + 1) * k]) {
                *z += w * o;
            }
        }
    }
}

/// `X[:, v] <- X[:, v] E`.
fn mix_cols(x: &mut Matrix, v: &[usize], e: &Matrix) {
    let cols = x.cols();
    let s = v.len();
    let mut old = alloc::vec![0.0; s];
    for row in x.as_mut_slice().chunks_exact_mut(cols) {
        for (o, &c) in old.iter_mut().zip(v) {
            *o = row[c];
        }
        for (b, &c) in v.iter().enumerate() {
            row[c] = (0..s).map(|a| old[a] * e[(a, b)]).sum();
        }
    }
}

fn all_zero<E: SkewEntries + ?Sized>(omega: &E) -> bool {
    let d = omega.dim();
    (0..d).all(|i| (i + 1..d).all(|j| omega.entry(i, j) == 0.0))
}

/// Draws one estimate of `omega` and reports the sampler's proposal count.
/// A zero `omega` yields a zero estimate under every sampler.
pub fn draw_estimate<E: SkewEntries + ?Sized, R: Rng + ?Sized>(
    omega: &E,
    sampler: &SamplerSpec,
    rng: &mut R,
) -> Result<(SkewEstimate, u64)> {
    match *sampler {
        SamplerSpec::Exact => Ok((SkewEstimate::exact(omega), 1)),
        SamplerSpec::UniformPartition { s } => {
            let partition = sample_uniform_partition(omega.dim(), s, rng)?;
            Ok((uniform_estimate(omega, &partition)?, 1))
        }
        SamplerSpec::HRegular { s, h, version, max_trials } => {
            if all_zero(omega) {
                crate::sampling::check_block_size(omega.dim(), s)?;
                return Ok((SkewEstimate::zero(omega.dim()), 0));
            }
            h_regular_sample(omega, s, &h, version, max_trials, rng)
        }
        SamplerSpec::Family { strategy, distribution } => {
            let family = build_nonintersecting_family(omega, strategy);
            Ok((importance_sample_family(omega, &family, &distribution, rng)?, 1))
        }
    }
}

/// Monotone seconds counter used to time steps.
pub trait Clock {
    fn now_seconds(&mut self) -> f64;
}

/// A clock that always reads zero, for reproducible traces.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullClock;

impl Clock for NullClock {
    fn now_seconds(&mut self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    pub objective: f64,
    /// `||Omega X||_F^2`, the squared Riemannian gradient norm.
    pub grad_norm_sq: f64,
    pub orth_error: f64,
    /// Step size used to reach this point; zero for the initial record.
    pub eta: f64,
    /// Sampler proposals used to reach this point; zero for the initial record.
    pub trials: u64,
    /// Time spent drawing the estimate and applying the update.
    pub step_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeTrace {
    pub records: Vec<TraceRecord>,
    pub final_point: ManifoldPoint,
}

impl OptimizeTrace {
    /// Running minimum of the squared gradient norm after each record.
    pub fn running_min_grad_norm_sq(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.records
            .iter()
            .map(|r| {
                best = best.min(r.grad_norm_sq);
                best
            })
            .collect()
    }
}

/// Gradient ascent `X_{i+1} = Gamma(eta_i Omega_hat_i) X_i` for `iters` steps,
/// with a fresh estimate drawn at every step.
pub fn optimize<F: Objective + ?Sized, R: Rng + ?Sized, C: Clock + ?Sized>(
    objective: &F,
    x0: &ManifoldPoint,
    config: &StepConfig,
    iters: usize,
    rng: &mut R,
    clock: &mut C,
) -> Result<OptimizeTrace> {
    if iters == 0 {
        return Err(Error::InvalidArgument("iters must be at least 1"));
    }
    let mut x = x0.clone();
    let mut records = Vec::with_capacity(iters + 1);
    let mut omega = measure(objective, &x, 0, 0.0, 0, 0.0, &mut records)?;
    for i in 0..iters {
        let at = |e: Error| Error::AtIteration { iter: i, source: Box::new(e) };
        let eta = config.step.at(i);
        let start = clock.now_seconds();
        let trials = match config.sampler {
            SamplerSpec::Exact => {
                x = exact_step_skew(&x, &omega, eta, config.retraction, GradientForm::Standard).map_err(at)?;
                1
            }
            ref sampler => {
                let (estimate, trials) = draw_estimate(&omega, sampler, rng).map_err(at)?;
                let mut m = x.matrix().clone();
                apply_estimate(&mut m, &estimate, eta, config.retraction, GradientForm::Standard).map_err(at)?;
                x = x.with_matrix(m);
                trials
            }
        };
        let seconds = clock.now_seconds() - start;
        omega = measure(objective, &x, i + 1, eta, trials, seconds, &mut records)?;
    }
    Ok(OptimizeTrace { records, final_point: x })
}

fn measure<F: Objective + ?Sized>(
    objective: &F,
    x: &ManifoldPoint,
    iter: usize,
    eta: f64,
    trials: u64,
    step_seconds: f64,
    records: &mut Vec<TraceRecord>,
) -> Result<SkewSymmetric> {
    let g = AmbientGradient::new(objective.gradient(x.matrix()));
    let omega = riemannian_skew(x, &g, GradientForm::Standard)?;
    let grad = omega.matrix().matmul(x.matrix())?;
    records.push(TraceRecord {
        iter,
        objective: objective.value(x.matrix()),
        grad_norm_sq: grad.frobenius_norm_sq(),
        orth_error: orthogonality_error(x.matrix()),
        eta,
        trials,
        step_seconds,
    });
    Ok(omega)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorStats {
    /// `||mean(Omega_hat) - Omega||_F`.
    pub mean_bias_fro: f64,
    /// `mean ||Omega_hat - Omega||_F^2`, without Bessel correction.
    pub empirical_var: f64,
}

pub fn estimator_stats<R: Rng + ?Sized>(
    omega: &SkewSymmetric,
    sampler: &SamplerSpec,
    draws: usize,
    rng: &mut R,
) -> Result<EstimatorStats> {
    if draws == 0 {
        return Err(Error::InvalidArgument("need at least one draw"));
    }
    let d = omega.d();
    // running mean, so that identical draws average to themselves exactly
    let mut mean = Matrix::zeros(d, d);
    let mut var = 0.0;
    for k in 1..=draws {
        let (est, _) = draw_estimate(omega, sampler, rng)?;
        let dense = est.densify();
        let diff = dense.matrix().sub(&mean)?;
        mean.axpy(1.0 / k as f64, &diff);
        var += dense.matrix().sub(omega.matrix())?.frobenius_norm_sq();
    }
    Ok(EstimatorStats { mean_bias_fro: mean.sub(omega.matrix())?.frobenius_norm(), empirical_var: var / draws as f64 })
}
