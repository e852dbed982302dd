//! Closed-form variances `E ||Omega_hat - Omega||_F^2` of the samplers.

use num_traits::ToPrimitive;

use super::counts::edge_multiplicity;
use super::estimate::SkewEntries;
use super::family::{family_probabilities, FamilyDistribution, MatchingFamily};
use super::partition::{check_block_size, enumerate_partitions};
use super::weight::{block_h_mass, l1_h_norm, WeightFunction};
use crate::error::Result;

#[inline]
fn sq(x: f64) -> f64 {
    x * x
}

fn fro_sq<E: SkewEntries + ?Sized>(omega: &E) -> f64 {
    let d = omega.dim();
    let mut upper = 0.0;
    for i in 0..d {
        for j in i + 1..d {
            upper += sq(omega.entry(i, j));
        }
    }
    2.0 * upper
}

fn matching_fro_sq<E: SkewEntries + ?Sized>(omega: &E, matching: &[(usize, usize)]) -> f64 {
    2.0 * matching.iter().map(|&(i, j)| sq(omega.entry(i, j))).sum::<f64>()
}

/// Uniform sampling over `T_s`: `(d - s) / (s - 1) * ||Omega||_F^2`.
/// Square-h sampling has the same variance.
pub fn uniform_partition_variance<E: SkewEntries + ?Sized>(omega: &E, s: usize) -> Result<f64> {
    let d = omega.dim();
    check_block_size(d, s)?;
    Ok((d - s) as f64 / (s - 1) as f64 * fro_sq(omega))
}

/// General h-regular variance
/// `||h(Omega)||_1 / (2W) * sum_T ||Omega[T]||_F^2 / h(G_T) - ||Omega||_F^2`,
/// summed over the enumerated `T_s`. Partitions with `h(G_T) = 0` are never
/// drawn and are skipped.
pub fn hregular_variance_enumerated<E: SkewEntries + ?Sized>(omega: &E, s: usize, h: &WeightFunction) -> Result<f64> {
    let d = omega.dim();
    let w = edge_multiplicity(d, s)?.to_f64().unwrap_or(f64::INFINITY);
    let l1 = l1_h_norm(omega, h);
    let mut sum = 0.0;
    for partition in enumerate_partitions(d, s)? {
        let mass = block_h_mass(omega, partition.blocks(), h);
        if mass > 0.0 {
            let block_sq: f64 = partition.edges().map(|(i, j)| 2.0 * sq(omega.entry(i, j))).sum();
            sum += block_sq / mass;
        }
    }
    Ok(l1 / (2.0 * w) * sum - fro_sq(omega))
}

/// Variance of a non-intersecting family drawn with `p_m ∝ sum_{e in m} |w_e|`:
/// `2 K sum_e w_e^2 / K(e) - ||Omega||_F^2`, where `K = sum_e |w_e|` and
/// `K(e)` is the `|w|`-mass of the matching holding `e`.
pub fn matching_family_abs_variance<E: SkewEntries + ?Sized>(omega: &E, family: &MatchingFamily) -> f64 {
    let mut total_k = 0.0;
    let mut per_matching = 0.0;
    for m in family.matchings() {
        let k: f64 = m.iter().map(|&(i, j)| omega.entry(i, j).abs()).sum();
        total_k += k;
        if k > 0.0 {
            per_matching += m.iter().map(|&(i, j)| sq(omega.entry(i, j))).sum::<f64>() / k;
        }
    }
    2.0 * total_k * per_matching - fro_sq(omega)
}

/// Variance under `p_m ∝ ||Omega[m]||_F`: `(sum_m ||Omega[m]||_F)^2 - ||Omega||_F^2`.
pub fn optimal_family_variance<E: SkewEntries + ?Sized>(omega: &E, family: &MatchingFamily) -> f64 {
    let s: f64 = family.matchings().iter().map(|m| libm::sqrt(matching_fro_sq(omega, m))).sum();
    s * s - fro_sq(omega)
}

/// Variance of any family distribution, `sum_m ||Omega[m]||_F^2 / p_m - ||Omega||_F^2`.
pub fn family_variance<E: SkewEntries + ?Sized>(
    omega: &E,
    family: &MatchingFamily,
    distribution: &FamilyDistribution,
) -> Result<f64> {
    let probs = family_probabilities(omega, family, distribution)?;
    let second: f64 = family
        .matchings()
        .iter()
        .zip(&probs)
        .filter(|(_, &p)| p > 0.0)
        .map(|(m, p)| matching_fro_sq(omega, m) / p)
        .sum();
    Ok(second - fro_sq(omega))
}
