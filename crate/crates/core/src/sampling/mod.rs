//! Tournament machinery: sub-tournament sampling and the unbiased block-sparse
//! estimators of a skew-symmetric matrix built on it.
//!
//! A skew-symmetric `Omega` is the adjacency matrix of a weighted tournament
//! on vertices `0..d`. Every sampler here picks a sub-tournament `T`, keeps the
//! entries of `Omega` on the edges of `T` and rescales them so that the
//! estimate is unbiased. The edges of `T` form disjoint blocks: the components
//! of a vertex partition, or the edges of a matching.
//!
//! Conventions:
//! * `||h(Omega)||_1` sums `h` over all `d^2` entries, so both triangles count.
//! * Frobenius norms and variances are always taken over the full `d x d` matrix.

mod counts;
mod estimate;
mod family;
mod partition;
mod rejection;
mod variance;
mod weight;

pub use counts::{count_partitions, edge_multiplicity, uniform_scale};
pub use estimate::{EstimateBlock, SkewEntries, SkewEstimate, LazySkew};
pub use family::{
    build_nonintersecting_family, family_estimate, family_probabilities, importance_sample_family,
    FamilyDistribution, FamilyStrategy, MatchingFamily,
};
pub use partition::{
    check_block_size, enumerate_partitions, sample_uniform_partition, uniform_estimate,
    VertexPartition, ENUMERATION_CAP,
};
pub use rejection::{h_regular_estimate, h_regular_sample, h_regular_sample_with_mass, RejectionVersion};
pub use variance::{
    family_variance, hregular_variance_enumerated, matching_family_abs_variance,
    optimal_family_variance, uniform_partition_variance,
};
pub use weight::{block_h_mass, l1_h_norm, mc_l1_estimate, rho_statistic, WeightFunction};
