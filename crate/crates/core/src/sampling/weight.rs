use alloc::vec::Vec;

use rand::{Rng, SeedableRng};

use super::estimate::SkewEntries;
use super::partition::check_block_size;
use crate::error::{Error, Result};

/// Even, non-negative edge-weight transform with `h(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightFunction {
    Abs,
    Square,
    Custom(CustomWeight),
}

/// A user-supplied weight transform that passed [`WeightFunction::custom`]'s checks.
#[derive(Debug, Clone, Copy)]
pub struct CustomWeight(fn(f64) -> f64);

impl PartialEq for CustomWeight {
    fn eq(&self, other: &Self) -> bool {
        core::ptr::fn_addr_eq(self.0, other.0)
    }
}

const CUSTOM_PROBES: usize = 64;

impl WeightFunction {
    /// Checks `h(0) = 0`, `h(x) = h(-x)` and `h(x) >= 0` on 64 sampled points.
    pub fn custom(h: fn(f64) -> f64) -> Result<Self> {
        if h(0.0) != 0.0 {
            return Err(Error::InvalidWeightFunction { x: 0.0 });
        }
        let mut rng = crate::rng::SeededRng::seed_from_u64(0x005e_ed0f_4a11);
        for _ in 0..CUSTOM_PROBES {
            // log-uniform magnitudes across 1e-6..1e6
            let x = libm::pow(10.0, rng.random_range(-6.0..6.0));
            let (pos, neg) = (h(x), h(-x));
            if !(pos >= 0.0) || pos != neg || !pos.is_finite() {
                return Err(Error::InvalidWeightFunction { x });
            }
        }
        Ok(WeightFunction::Custom(CustomWeight(h)))
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            WeightFunction::Abs => x.abs(),
            WeightFunction::Square => x * x,
            WeightFunction::Custom(CustomWeight(h)) => h(x),
        }
    }
}

/// `||h(Omega)||_1 = sum_{i,j} h(Omega[i,j])` over all `d^2` entries.
pub fn l1_h_norm<E: SkewEntries + ?Sized>(omega: &E, h: &WeightFunction) -> f64 {
    let d = omega.dim();
    let mut upper = 0.0;
    for i in 0..d {
        for j in i + 1..d {
            upper += h.eval(omega.entry(i, j));
        }
    }
    2.0 * upper
}

/// `h(G_T)`: the h-mass of the edges inside the given blocks (each edge once).
pub fn block_h_mass<E: SkewEntries + ?Sized>(omega: &E, blocks: &[Vec<usize>], h: &WeightFunction) -> f64 {
    blocks.iter().map(|b| chunk_h_mass(omega, b, h)).sum()
}

#[inline]
pub(crate) fn chunk_h_mass<E: SkewEntries + ?Sized>(omega: &E, block: &[usize], h: &WeightFunction) -> f64 {
    let mut m = 0.0;
    for a in 0..block.len() {
        for b in a + 1..block.len() {
            m += h.eval(omega.entry(block[a], block[b]));
        }
    }
    m
}

/// Unbiased Monte Carlo estimate of `||h(Omega)||_1`: each upper-triangle entry
/// is kept with probability `r / n` and reweighted by `n / r`, `n = C(d, 2)`.
/// The result is doubled to match the all-entries convention of [`l1_h_norm`].
pub fn mc_l1_estimate<E: SkewEntries + ?Sized, R: Rng + ?Sized>(
    omega: &E,
    h: &WeightFunction,
    r: usize,
    rng: &mut R,
) -> Result<f64> {
    let d = omega.dim();
    let n = d * d.saturating_sub(1) / 2;
    if r == 0 || r > n {
        return Err(Error::SampleCountOutOfRange { r, n });
    }
    let keep = r as f64 / n as f64;
    let weight = n as f64 / r as f64;
    let mut total = 0.0;
    for i in 0..d {
        for j in i + 1..d {
            if r == n || rng.random::<f64>() < keep {
                total += weight * h.eval(omega.entry(i, j));
            }
        }
    }
    Ok(2.0 * total)
}

/// `rho = ||h(Omega)||_1 / gamma`, where `gamma` sums the `(d/s) C(s,2)` largest
/// upper-triangle values of `h(Omega)`, doubled to count both triangles.
pub fn rho_statistic<E: SkewEntries + ?Sized>(omega: &E, s: usize, h: &WeightFunction) -> Result<f64> {
    let d = omega.dim();
    check_block_size(d, s)?;
    let mut values: Vec<f64> = Vec::with_capacity(d * (d - 1) / 2);
    for i in 0..d {
        for j in i + 1..d {
            values.push(h.eval(omega.entry(i, j)));
        }
    }
    let total: f64 = 2.0 * values.iter().sum::<f64>();
    let keep = (d / s) * s * (s - 1) / 2;
    values.sort_unstable_by(|a, b| b.total_cmp(a));
    let gamma: f64 = 2.0 * values[..keep].iter().sum::<f64>();
    if !(gamma > 0.0) {
        return Err(Error::ZeroHMass);
    }
    Ok(total / gamma)
}
