//! Isospectral sorting flow on `O(d)` and the step-size stability benchmark
//! comparing the sampled integrator with dense exponential integrators.
//!
//! The flow `dX/dt = X (N S - S N)`, `S = X^T Q X`, decreases `tr(N S)`. With
//! `N = diag(d, ..., 1)` the diagonal of `S` at the limit lists the entries
//! of `q` in increasing order.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::manifold::{orthogonality_error, random_orthogonal, ManifoldPoint, SkewSymmetric};
use crate::matrix::Matrix;
use crate::retraction::{matrix_exp, rotate_cols};
use crate::rng::derive;
use crate::sampling::MatchingFamily;
use crate::ExpBackend;

#[derive(Debug, Clone, PartialEq)]
pub struct SortingFlowProblem {
    n_diag: Vec<f64>,
    q_diag: Vec<f64>,
    x0: ManifoldPoint,
}

fn pairwise_distinct(v: &[f64]) -> bool {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s.windows(2).all(|w| w[0] != w[1])
}

/// How the sequence to sort is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QDistribution {
    /// A random permutation of `1, 2, ..., d`.
    #[default]
    ShuffledRanks,
    /// Independent draws from `U(0, 1)`, redrawn on duplicates.
    Uniform,
}

impl SortingFlowProblem {
    pub fn new(n_diag: Vec<f64>, q_diag: Vec<f64>, x0: ManifoldPoint) -> Result<Self> {
        let d = n_diag.len();
        if q_diag.len() != d || x0.d() != d || x0.k() != d {
            return Err(Error::DimensionMismatch { op: "SortingFlowProblem", expected: (d, d), found: x0.matrix().shape() });
        }
        if !pairwise_distinct(&n_diag) || !pairwise_distinct(&q_diag) {
            return Err(Error::InvalidArgument("diagonal entries of N and Q must be pairwise distinct"));
        }
        Ok(Self { n_diag, q_diag, x0 })
    }

    /// `N = diag(d, ..., 1)`, random `q` and a random orthogonal start.
    pub fn random<R: Rng + ?Sized>(d: usize, q_dist: QDistribution, rng: &mut R) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument("sorting needs d >= 2"));
        }
        let n_diag = (0..d).map(|i| (d - i) as f64).collect();
        let q_diag = match q_dist {
            QDistribution::ShuffledRanks => {
                let mut q: Vec<f64> = (1..=d).map(|k| k as f64).collect();
                q.shuffle(rng);
                q
            }
            QDistribution::Uniform => loop {
                let q: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
                if pairwise_distinct(&q) {
                    break q;
                }
            },
        };
        let x0 = random_orthogonal(d, rng);
        Self::new(n_diag, q_diag, x0)
    }

    pub fn d(&self) -> usize {
        self.n_diag.len()
    }

    pub fn n_diag(&self) -> &[f64] {
        &self.n_diag
    }

    pub fn q_diag(&self) -> &[f64] {
        &self.q_diag
    }

    pub fn x0(&self) -> &ManifoldPoint {
        &self.x0
    }
}

fn check_sorting_dims(x: &Matrix, n: &[f64], q: &[f64]) -> Result<()> {
    let d = n.len();
    if x.shape() != (d, d) || q.len() != d {
        return Err(Error::DimensionMismatch { op: "sorting_omega", expected: (d, d), found: x.shape() });
    }
    Ok(())
}

/// `S[i, j] = sum_r X[r, i] q_r X[r, j]`.
#[inline]
fn s_entry(x: &Matrix, q: &[f64], i: usize, j: usize) -> f64 {
    let d = x.cols();
    let data = x.as_slice();
    let mut acc = 0.0;
    for (r, qr) in q.iter().enumerate() {
        acc += data[r * d + i] * qr * data[r * d + j];
    }
    acc
}

/// `Omega = N S - S N` with `S = X^T Q X`, for diagonal `N` and `Q`.
pub fn sorting_omega(x: &ManifoldPoint, n: &[f64], q: &[f64]) -> Result<SkewSymmetric> {
    check_sorting_dims(x.matrix(), n, q)?;
    let d = n.len();
    let qx = Matrix::from_fn(d, d, |r, c| q[r] * x.matrix()[(r, c)]);
    let s = x.matrix().tr_matmul(&qx)?;
    Ok(SkewSymmetric::from_upper(d, |i, j| (n[i] - n[j]) * s[(i, j)]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortOrder {
    Decreasing,
    Increasing,
}

/// Fraction of pairs `i < j` ordered as `order` asks. Ties count as unordered.
pub fn sequence_order_fraction(values: &[f64], order: SortOrder) -> f64 {
    let d = values.len();
    if d < 2 {
        return 1.0;
    }
    let mut good = 0usize;
    for i in 0..d {
        for j in i + 1..d {
            let ok = match order {
                SortOrder::Decreasing => values[i] > values[j],
                SortOrder::Increasing => values[i] < values[j],
            };
            good += ok as usize;
        }
    }
    good as f64 / (d * (d - 1) / 2) as f64
}

/// [`sequence_order_fraction`] for a permutation of `0..d` or of `1..=d`.
pub fn inversion_fraction(perm: &[usize], order: SortOrder) -> Result<f64> {
    let d = perm.len();
    let base = perm.iter().copied().min().unwrap_or(0);
    if base > 1 {
        return Err(Error::InvalidPermutation);
    }
    let mut seen = alloc::vec![false; d];
    for &p in perm {
        let k = p - base;
        if k >= d || core::mem::replace(&mut seen[k], true) {
            return Err(Error::InvalidPermutation);
        }
    }
    let values: Vec<f64> = perm.iter().map(|&p| p as f64).collect();
    Ok(sequence_order_fraction(&values, order))
}

/// Greedy rounding to a permutation: repeatedly take the largest `|X[i, j]|`
/// over free rows and columns. Ties go to the lowest `(i, j)`. Returns
/// `perm` with `perm[row] = column`.
pub fn extract_permutation(x: &Matrix) -> Result<Vec<usize>> {
    if !x.is_square() {
        return Err(Error::DimensionMismatch { op: "extract_permutation", expected: (x.rows(), x.rows()), found: x.shape() });
    }
    let d = x.rows();
    let mut cells: Vec<(f64, usize, usize)> = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            cells.push((x[(i, j)].abs(), i, j));
        }
    }
    // stable: equal magnitudes keep row-major order
    cells.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut perm = alloc::vec![usize::MAX; d];
    let mut col_used = alloc::vec![false; d];
    let mut left = d;
    for (_, i, j) in cells {
        if left == 0 {
            break;
        }
        if perm[i] == usize::MAX && !col_used[j] {
            perm[i] = j;
            col_used[j] = true;
            left -= 1;
        }
    }
    Ok(perm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortingIntegrator {
    /// Uniform draw of one round-robin matching per step, applied as Givens rotations.
    Stochastic,
    /// Dense `X <- X exp(eta Omega)` with the given exponential.
    Exact(ExpBackend),
}

impl SortingIntegrator {
    pub fn name(&self) -> &'static str {
        match self {
            SortingIntegrator::Stochastic => "stochastic",
            SortingIntegrator::Exact(_) => "exact",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SortingBenchmark {
    pub d: usize,
    pub etas: Vec<f64>,
    pub integrators: Vec<SortingIntegrator>,
    pub trials: usize,
    pub seed: u64,
    /// Replaces `ceil(50 / eta)` when set.
    pub steps_override: Option<u64>,
    pub q_dist: QDistribution,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SortingRunResult {
    pub integrator: SortingIntegrator,
    pub eta: f64,
    pub trial: usize,
    /// Steps actually taken; fewer than planned when the run diverged.
    pub steps: u64,
    /// `||X X^T - I||_F` at the end; NaN after divergence.
    pub epsilon: f64,
    /// Fraction of pairs of the recovered sequence in increasing order; 0 after divergence.
    pub inv_fraction: f64,
    pub diverged: bool,
}

/// `ceil(50 / eta)`, ignoring round-off in the quotient.
pub fn steps_for(eta: f64) -> u64 {
    let r = 50.0 / eta;
    let n = libm::round(r);
    if (r - n).abs() <= 1e-9 * r {
        n as u64
    } else {
        libm::ceil(r) as u64
    }
}

/// The sequence `p` read off `X`: `p[c] = q[r]` where row `r` is assigned column `c`.
pub fn recovered_sequence(x: &Matrix, q: &[f64]) -> Result<Vec<f64>> {
    let perm = extract_permutation(x)?;
    let mut p = alloc::vec![0.0; q.len()];
    for (r, &c) in perm.iter().enumerate() {
        p[c] = q[r];
    }
    Ok(p)
}

const DIVERGENCE_CHECK_EVERY: u64 = 256;

/// Integrates one problem with one integrator and summarizes the end point.
pub fn run_sorting_flow<R: Rng + ?Sized>(
    problem: &SortingFlowProblem,
    integrator: SortingIntegrator,
    eta: f64,
    steps: u64,
    rng: &mut R,
) -> Result<(Matrix, u64, bool)> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidStepSize { eta });
    }
    let d = problem.d();
    let (n, q) = (problem.n_diag(), problem.q_diag());
    let mut x = problem.x0().matrix().clone();
    let mut taken = 0;
    let mut diverged = false;
    match integrator {
        SortingIntegrator::Stochastic => {
            let family = MatchingFamily::round_robin(d);
            let scale = family.len() as f64;
            while taken < steps {
                let m = &family.matchings()[rng.random_range(0..family.len())];
                for &(i, j) in m {
                    let omega_ij = (n[i] - n[j]) * s_entry(&x, q, i, j);
                    rotate_cols(&mut x, i, j, eta * scale * omega_ij);
                }
                taken += 1;
                if taken % DIVERGENCE_CHECK_EVERY == 0 && !x.is_finite() {
                    diverged = true;
                    break;
                }
            }
        }
        SortingIntegrator::Exact(backend) => {
            let mut next = Matrix::zeros(d, d);
            while taken < steps {
                let omega = SkewSymmetric::from_upper(d, |i, j| eta * (n[i] - n[j]) * s_entry(&x, q, i, j));
                let e = matrix_exp(&omega, backend)?;
                x.matmul_into(&e, &mut next)?;
                core::mem::swap(&mut x, &mut next);
                taken += 1;
                if taken % DIVERGENCE_CHECK_EVERY == 0 && !x.is_finite() {
                    diverged = true;
                    break;
                }
            }
        }
    }
    diverged |= !x.is_finite();
    Ok((x, taken, diverged))
}

/// Runs every `(eta, integrator, trial)` cell. Each trial draws its own problem,
/// shared by all step sizes and integrators, from stream `2 * trial` of `seed`.
/// The stochastic integrator uses stream `2 * trial + 1`.
pub fn run_sorting_benchmark(config: &SortingBenchmark) -> Result<Vec<SortingRunResult>> {
    for &eta in &config.etas {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidStepSize { eta });
        }
    }
    let problems: Vec<SortingFlowProblem> = (0..config.trials)
        .map(|t| SortingFlowProblem::random(config.d, config.q_dist, &mut derive(config.seed, 2 * t as u64)))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(config.etas.len() * config.integrators.len() * config.trials);
    for &eta in &config.etas {
        let steps = config.steps_override.unwrap_or_else(|| steps_for(eta));
        for &integrator in &config.integrators {
            for (trial, problem) in problems.iter().enumerate() {
                let mut rng = derive(config.seed, 2 * trial as u64 + 1);
                let (x, taken, diverged) = run_sorting_flow(problem, integrator, eta, steps, &mut rng)?;
                let (epsilon, inv_fraction) = if diverged {
                    (f64::NAN, 0.0)
                } else {
                    let p = recovered_sequence(&x, problem.q_diag())?;
                    (orthogonality_error(&x), sequence_order_fraction(&p, SortOrder::Increasing))
                };
                out.push(SortingRunResult { integrator, eta, trial, steps: taken, epsilon, inv_fraction, diverged });
            }
        }
    }
    Ok(out)
}
