use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use super::estimate::{SkewEntries, SkewEstimate};
use super::weight::WeightFunction;
use crate::error::{Error, Result};

#[inline]
fn sq(x: f64) -> f64 {
    x * x
}

/// Edge-disjoint matchings on `0..d`. Edges are stored as `(i, j)` with `i < j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingFamily {
    d: usize,
    matchings: Vec<Vec<(usize, usize)>>,
    complete: bool,
}

impl MatchingFamily {
    pub fn new(d: usize, matchings: Vec<Vec<(usize, usize)>>) -> Result<Self> {
        let mut edge_used = alloc::vec![false; d * d];
        let mut vertex_seen = alloc::vec![usize::MAX; d];
        let mut edges = 0;
        let mut normalized = Vec::with_capacity(matchings.len());
        for (m, matching) in matchings.into_iter().enumerate() {
            let mut out = Vec::with_capacity(matching.len());
            for (a, b) in matching {
                let (i, j) = if a < b { (a, b) } else { (b, a) };
                if i == j || j >= d {
                    return Err(Error::InvalidFamily { reason: "edge endpoints must be distinct vertices below d" });
                }
                if vertex_seen[i] == m || vertex_seen[j] == m {
                    return Err(Error::InvalidFamily { reason: "a vertex appears twice in one matching" });
                }
                vertex_seen[i] = m;
                vertex_seen[j] = m;
                if core::mem::replace(&mut edge_used[i * d + j], true) {
                    return Err(Error::InvalidFamily { reason: "an edge appears in two matchings" });
                }
                edges += 1;
                out.push((i, j));
            }
            normalized.push(out);
        }
        let complete = edges == d * d.saturating_sub(1) / 2;
        Ok(Self { d, matchings: normalized, complete })
    }

    /// The round-robin 1-factorization: `d - 1` perfect matchings for even `d`,
    /// `d` near-perfect matchings for odd `d`.
    pub fn round_robin(d: usize) -> Self {
        // odd d plays against a dummy vertex `d` that is dropped afterwards
        let n = if d.is_multiple_of(2) { d } else { d + 1 };
        let mut matchings = Vec::with_capacity(n.saturating_sub(1));
        for r in 0..n.saturating_sub(1) {
            let m = n - 1;
            let mut matching = Vec::with_capacity(n / 2);
            let mut push = |a: usize, b: usize| {
                if a < d && b < d {
                    matching.push((a.min(b), a.max(b)));
                }
            };
            push(r, m);
            for k in 1..n / 2 {
                push((r + k) % m, (r + m - k) % m);
            }
            matchings.push(matching);
        }
        Self { d, matchings, complete: true }
    }

    /// Greedy heavy matchings: repeatedly extract a maximal matching from the
    /// remaining edges, scanning them by decreasing `|w|`, until every edge of
    /// `K_d` is used. Matchings are returned by decreasing total `|w|`.
    pub fn greedy_heavy<E: SkewEntries + ?Sized>(omega: &E) -> Self {
        let d = omega.dim();
        let mut edges: Vec<(f64, usize, usize)> = Vec::with_capacity(d * d.saturating_sub(1) / 2);
        for i in 0..d {
            for j in i + 1..d {
                edges.push((omega.entry(i, j).abs(), i, j));
            }
        }
        // stable sort keeps lexicographic order among ties
        edges.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut matchings: Vec<(f64, Vec<(usize, usize)>)> = Vec::new();
        let mut busy = alloc::vec![usize::MAX; d];
        while !edges.is_empty() {
            let round = matchings.len();
            let mut weight = 0.0;
            let mut matching = Vec::new();
            edges.retain(|&(w, i, j)| {
                if busy[i] == round || busy[j] == round {
                    return true;
                }
                busy[i] = round;
                busy[j] = round;
                weight += w;
                matching.push((i, j));
                false
            });
            matchings.push((weight, matching));
        }
        matchings.sort_by(|a, b| b.0.total_cmp(&a.0));
        Self { d, matchings: matchings.into_iter().map(|(_, m)| m).collect(), complete: true }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matchings(&self) -> &[Vec<(usize, usize)>] {
        &self.matchings
    }

    pub fn len(&self) -> usize {
        self.matchings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matchings.is_empty()
    }

    /// Whether the matchings partition every edge of `K_d`.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// Index of the matching holding edge `(i, j)`, if any.
    pub fn matching_of(&self, i: usize, j: usize) -> Option<usize> {
        let e = (i.min(j), i.max(j));
        self.matchings.iter().position(|m| m.contains(&e))
    }

    fn check_covers<E: SkewEntries + ?Sized>(&self, omega: &E) -> Result<()> {
        if self.complete {
            return Ok(());
        }
        let d = self.d;
        let mut covered = alloc::vec![false; d * d];
        for &(i, j) in self.matchings.iter().flatten() {
            covered[i * d + j] = true;
        }
        for i in 0..d {
            for j in i + 1..d {
                if !covered[i * d + j] && omega.entry(i, j) != 0.0 {
                    return Err(Error::UncoveredEdge { i, j });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyStrategy {
    RoundRobin,
    GreedyHeavy,
}

/// How a matching is drawn from a family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyDistribution {
    /// `p_m ∝ sum_{e in m} h(w_e)`.
    HRegular(WeightFunction),
    /// `p_m ∝ sqrt(sum_{e in m} w_e^2)`, the variance-minimizing choice.
    OptimalL2,
    /// `p_m = 1 / |family|`. Needs no look at `Omega` before the draw.
    Uniform,
}

pub fn build_nonintersecting_family<E: SkewEntries + ?Sized>(omega: &E, strategy: FamilyStrategy) -> MatchingFamily {
    match strategy {
        FamilyStrategy::RoundRobin => MatchingFamily::round_robin(omega.dim()),
        FamilyStrategy::GreedyHeavy => MatchingFamily::greedy_heavy(omega),
    }
}

fn matching_weight<E: SkewEntries + ?Sized>(
    omega: &E,
    matching: &[(usize, usize)],
    distribution: &FamilyDistribution,
) -> f64 {
    match distribution {
        FamilyDistribution::HRegular(h) => matching.iter().map(|&(i, j)| h.eval(omega.entry(i, j))).sum(),
        FamilyDistribution::OptimalL2 => libm::sqrt(matching.iter().map(|&(i, j)| sq(omega.entry(i, j))).sum()),
        FamilyDistribution::Uniform => 1.0,
    }
}

/// Normalized draw probabilities of each matching. `Err(ZeroHMass)` when every
/// matching has zero weight.
pub fn family_probabilities<E: SkewEntries + ?Sized>(
    omega: &E,
    family: &MatchingFamily,
    distribution: &FamilyDistribution,
) -> Result<Vec<f64>> {
    check_dims(omega, family)?;
    family.check_covers(omega)?;
    let weights: Vec<f64> = family.matchings.iter().map(|m| matching_weight(omega, m, distribution)).collect();
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroHMass);
    }
    for (m, &w) in family.matchings.iter().zip(&weights) {
        if w == 0.0 {
            if let Some(&(i, j)) = m.iter().find(|&&(i, j)| omega.entry(i, j) != 0.0) {
                // a zero-probability matching with live entries would bias the estimate
                return Err(Error::UncoveredEdge { i, j });
            }
        }
    }
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// The estimate `(1 / p) * Omega[m]` for matching `index` drawn with probability `p`.
pub fn family_estimate<E: SkewEntries + ?Sized>(
    omega: &E,
    family: &MatchingFamily,
    index: usize,
    p: f64,
) -> Result<SkewEstimate> {
    check_dims(omega, family)?;
    let matching = family.matchings.get(index).ok_or(Error::InvalidArgument("matching index out of range"))?;
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidArgument("matching probability must lie in (0, 1]"));
    }
    Ok(SkewEstimate::from_matching(omega, matching, 1.0 / p))
}

/// Draws one matching from `family` and returns its importance-weighted estimate.
pub fn importance_sample_family<E: SkewEntries + ?Sized, R: Rng + ?Sized>(
    omega: &E,
    family: &MatchingFamily,
    distribution: &FamilyDistribution,
    rng: &mut R,
) -> Result<SkewEstimate> {
    check_dims(omega, family)?;
    if family.is_empty() {
        return Ok(SkewEstimate::zero(family.d));
    }
    if let FamilyDistribution::Uniform = distribution {
        family.check_covers(omega)?;
        let n = family.len();
        let index = rng.random_range(0..n);
        return family_estimate(omega, family, index, 1.0 / n as f64);
    }
    let probs = match family_probabilities(omega, family, distribution) {
        Ok(p) => p,
        Err(Error::ZeroHMass) if all_zero(omega) => return Ok(SkewEstimate::zero(family.d)),
        Err(e) => return Err(e),
    };
    let index = WeightedIndex::new(&probs).map_err(|_| Error::ZeroHMass)?.sample(rng);
    family_estimate(omega, family, index, probs[index])
}

fn all_zero<E: SkewEntries + ?Sized>(omega: &E) -> bool {
    let d = omega.dim();
    (0..d).all(|i| (i + 1..d).all(|j| omega.entry(i, j) == 0.0))
}

fn check_dims<E: SkewEntries + ?Sized>(omega: &E, family: &MatchingFamily) -> Result<()> {
    if omega.dim() != family.d {
        return Err(Error::DimensionMismatch {
            op: "matching family",
            expected: (family.d, family.d),
            found: (omega.dim(), omega.dim()),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::SkewSymmetric;
    use crate::rng::seeded;
    use alloc::vec;

    fn covers_k_d(f: &MatchingFamily) -> bool {
        let d = f.d();
        let mut seen = vec![0u8; d * d];
        for &(i, j) in f.matchings().iter().flatten() {
            seen[i * d + j] += 1;
        }
        (0..d).all(|i| (i + 1..d).all(|j| seen[i * d + j] == 1))
    }

    #[test]
    fn round_robin_factorizes() {
        let f = MatchingFamily::round_robin(4);
        assert_eq!(f.len(), 3);
        assert!(f.matchings().iter().all(|m| m.len() == 2));
        assert_eq!(MatchingFamily::round_robin(2).matchings(), &[vec![(0, 1)]]);
        for d in 1..=17 {
            let f = MatchingFamily::round_robin(d);
            assert!(covers_k_d(&f), "d={d}");
            assert!(MatchingFamily::new(d, f.matchings().to_vec()).unwrap().is_complete());
            if d % 2 == 0 {
                assert_eq!(f.len(), d - 1);
                assert!(f.matchings().iter().all(|m| m.len() == d / 2));
            }
        }
    }

    #[test]
    fn greedy_puts_the_dominant_edge_first() {
        let mut rng = seeded(9);
        let base = SkewSymmetric::random(7, &mut rng);
        let omega = SkewSymmetric::from_upper(7, |i, j| if (i, j) == (2, 5) { 50.0 } else { base.get(i, j) });
        let f = MatchingFamily::greedy_heavy(&omega);
        assert!(f.matchings()[0].contains(&(2, 5)));
        assert!(covers_k_d(&f));
        let weights: Vec<f64> =
            f.matchings().iter().map(|m| m.iter().map(|&(i, j)| omega.get(i, j).abs()).sum()).collect();
        assert!(weights.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn validation() {
        assert!(MatchingFamily::new(4, vec![vec![(0, 1), (1, 2)]]).is_err());
        assert!(MatchingFamily::new(4, vec![vec![(0, 1)], vec![(1, 0)]]).is_err());
        assert!(MatchingFamily::new(4, vec![vec![(0, 4)]]).is_err());
        let partial = MatchingFamily::new(4, vec![vec![(0, 1), (2, 3)]]).unwrap();
        assert!(!partial.is_complete());
        let omega = SkewSymmetric::from_upper(4, |i, j| if (i, j) == (0, 2) { 1.0 } else { 0.0 });
        let err = importance_sample_family(&omega, &partial, &FamilyDistribution::OptimalL2, &mut seeded(0));
        assert_eq!(err.unwrap_err(), Error::UncoveredEdge { i: 0, j: 2 });
    }

    #[test]
    fn single_matching_family_is_exact() {
        let omega = SkewSymmetric::from_upper(4, |i, j| match (i, j) {
            (0, 3) => 2.0,
            (1, 2) => -1.0,
            _ => 0.0,
        });
        let family = MatchingFamily::new(4, vec![vec![(0, 3), (1, 2)]]).unwrap();
        let est = importance_sample_family(&omega, &family, &FamilyDistribution::OptimalL2, &mut seeded(1)).unwrap();
        assert_eq!(est.scale(), 1.0);
        assert_eq!(est.densify(), omega);
    }

    #[test]
    fn optimal_l2_probabilities_and_unbiasedness() {
        let omega = SkewSymmetric::random(4, &mut seeded(10));
        let family = MatchingFamily::round_robin(4);
        let probs = family_probabilities(&omega, &family, &FamilyDistribution::OptimalL2).unwrap();
        let raw: Vec<f64> = family
            .matchings()
            .iter()
            .map(|m| m.iter().map(|&(i, j)| omega.get(i, j).powi(2)).sum::<f64>().sqrt())
            .collect();
        let total: f64 = raw.iter().sum();
        for (p, r) in probs.iter().zip(&raw) {
            assert!((p - r / total).abs() < 1e-12);
        }
        let mut mean = SkewSymmetric::zeros(4);
        for (k, p) in probs.iter().enumerate() {
            let est = family_estimate(&omega, &family, k, *p).unwrap();
            mean = mean.add(&est.densify().scale(*p)).unwrap();
        }
        assert!(mean.matrix().max_abs_diff(omega.matrix()) < 1e-12);
    }

    #[test]
    fn zero_omega_gives_zero_estimate() {
        let family = MatchingFamily::round_robin(6);
        for dist in [FamilyDistribution::OptimalL2, FamilyDistribution::Uniform, FamilyDistribution::HRegular(WeightFunction::Abs)] {
            let est = importance_sample_family(&SkewSymmetric::zeros(6), &family, &dist, &mut seeded(2)).unwrap();
            assert!(est.is_zero());
        }
    }
}
