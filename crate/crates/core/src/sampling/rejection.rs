use rand::Rng;

use super::estimate::{EstimateBlock, SkewEntries, SkewEstimate};
use super::partition::{check_block_size, shuffled_order, VertexPartition};
use super::weight::{block_h_mass, chunk_h_mass, l1_h_norm, WeightFunction};
use crate::error::{Error, Result};

/// Acceptance threshold used by the h-regular rejection sampler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RejectionVersion {
    /// `tau = ||h(Omega)||_1`. Always a valid bound.
    Basic,
    /// `tau = s / (d alpha beta) * ||h(Omega)||_1`, valid for (alpha, beta, h)-balanced `Omega`.
    Balanced { alpha: f64, beta: f64 },
}

impl RejectionVersion {
    fn tau(&self, d: usize, s: usize, l1: f64) -> Result<f64> {
        match *self {
            RejectionVersion::Basic => Ok(l1),
            RejectionVersion::Balanced { alpha, beta } => {
                let ok = |x: f64| x > 0.0 && x < 1.0;
                if !ok(alpha) || !ok(beta) {
                    return Err(Error::InvalidBalance { alpha, beta });
                }
                Ok(s as f64 / (d as f64 * alpha * beta) * l1)
            }
        }
    }
}

/// The h-regular estimate `||h(Omega)||_1 / (2 h(G_T)) * Omega[T]` for a fixed `T`.
pub fn h_regular_estimate<E: SkewEntries + ?Sized>(
    omega: &E,
    partition: &VertexPartition,
    h: &WeightFunction,
) -> Result<SkewEstimate> {
    let mass = block_h_mass(omega, partition.blocks(), h);
    if !(mass > 0.0) {
        return Err(Error::ZeroHMass);
    }
    let l1 = l1_h_norm(omega, h);
    let blocks = partition.blocks().iter().map(|b| EstimateBlock::restrict(omega, b.clone())).collect();
    Ok(SkewEstimate::new(partition.d(), blocks, l1 / (2.0 * mass)))
}

/// Draws `T ~ p_T ∝ h(G_T)` over `T_s` by rejection from the uniform
/// distribution. Returns the estimate and the number of proposals used,
/// including the accepted one.
pub fn h_regular_sample<E: SkewEntries + ?Sized, R: Rng + ?Sized>(
    omega: &E,
    s: usize,
    h: &WeightFunction,
    version: RejectionVersion,
    max_trials: u64,
    rng: &mut R,
) -> Result<(SkewEstimate, u64)> {
    let l1 = l1_h_norm(omega, h);
    h_regular_sample_with_mass(omega, s, h, version, l1, max_trials, rng)
}

/// As [`h_regular_sample`] with `||h(Omega)||_1` supplied by the caller, e.g.
/// from [`super::mc_l1_estimate`]. The returned scale uses the supplied value.
pub fn h_regular_sample_with_mass<E: SkewEntries + ?Sized, R: Rng + ?Sized>(
    omega: &E,
    s: usize,
    h: &WeightFunction,
    version: RejectionVersion,
    l1: f64,
    max_trials: u64,
    rng: &mut R,
) -> Result<(SkewEstimate, u64)> {
    let d = omega.dim();
    check_block_size(d, s)?;
    if !(l1 > 0.0) {
        return Err(Error::ZeroHMass);
    }
    let tau = version.tau(d, s, l1)?;
    for trial in 1..=max_trials {
        let order = shuffled_order(d, rng);
        let mass: f64 = order.chunks(s).map(|b| chunk_h_mass(omega, b, h)).sum();
        let required = 2.0 * mass;
        // Basic can only trip this when a caller-supplied l1 underestimates the
        // mass; the slack absorbs summation-order round-off when s = d.
        if required > tau * (1.0 + 1e-12) {
            return Err(Error::TauViolation { required, tau });
        }
        if mass > 0.0 && rng.random::<f64>() < required / tau {
            let partition = VertexPartition::from_order(&order, s)?;
            let blocks = partition.blocks().iter().map(|b| EstimateBlock::restrict(omega, b.clone())).collect();
            return Ok((SkewEstimate::new(d, blocks, l1 / required), trial));
        }
    }
    Err(Error::MaxTrialsExceeded { max_trials })
}
