use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use orthoflow::flows::QDistribution;
use orthoflow::integrator::{Retraction, SamplerSpec};
use orthoflow::sampling::{FamilyDistribution, FamilyStrategy, RejectionVersion, WeightFunction};
use orthoflow::ExpBackend;

use crate::error::{CliError, Result};

/// Step-size grid of the sorting benchmark.
pub const TABLE_ETAS: [f64; 10] = [1e-5, 5e-5, 1e-4, 1.5e-4, 1e-3, 1.5e-3, 1e-2, 1.5e-2, 1e-1, 1.5e-1];

#[derive(Debug, Parser)]
#[command(name = "orthoflow", version, about = "Seeded experiments with stochastic flows on orthogonal groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print |T_s|, the edge multiplicity W and the uniform scale (d-1)/(s-1).
    Counts {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        s: usize,
    },
    /// Analytic and empirical variance of sampled estimates of a random Omega.
    Variance(VarianceArgs),
    /// Sorting-flow step-size benchmark.
    Sortflow(SortflowArgs),
    /// Run the optimizer on a Procrustes objective and print its trace.
    Optimize(OptimizeArgs),
    /// Draw one estimate and print it as JSON.
    Sample(SampleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplerKind {
    Exact,
    Uniform,
    Hreg,
    Family,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HKind {
    Abs,
    Square,
}

impl HKind {
    pub fn weight(self) -> WeightFunction {
        match self {
            HKind::Abs => WeightFunction::Abs,
            HKind::Square => WeightFunction::Square,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyKind {
    RoundRobin,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyDistKind {
    Optimal,
    Hreg,
    Uniform,
}

/// Sampler options shared by `variance`, `optimize` and `sample`.
#[derive(Debug, Clone, Args)]
pub struct SamplerArgs {
    /// Block size for the uniform and h-regular samplers.
    #[arg(long, default_value_t = 2)]
    pub s: usize,
    #[arg(long, value_enum, default_value_t = HKind::Abs)]
    pub h: HKind,
    /// Balance parameters; setting both switches the h-regular sampler to the tighter threshold.
    #[arg(long, requires = "beta")]
    pub alpha: Option<f64>,
    #[arg(long, requires = "alpha")]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_trials: u64,
    #[arg(long, value_enum, default_value_t = StrategyKind::RoundRobin)]
    pub family_strategy: StrategyKind,
    #[arg(long, value_enum, default_value_t = FamilyDistKind::Optimal)]
    pub family_dist: FamilyDistKind,
}

impl SamplerArgs {
    pub fn spec(&self, kind: SamplerKind) -> SamplerSpec {
        match kind {
            SamplerKind::Exact => SamplerSpec::Exact,
            SamplerKind::Uniform => SamplerSpec::UniformPartition { s: self.s },
            SamplerKind::Hreg => SamplerSpec::HRegular {
                s: self.s,
                h: self.h.weight(),
                version: match (self.alpha, self.beta) {
                    (Some(alpha), Some(beta)) => RejectionVersion::Balanced { alpha, beta },
                    _ => RejectionVersion::Basic,
                },
                max_trials: self.max_trials,
            },
            SamplerKind::Family => SamplerSpec::Family {
                strategy: match self.family_strategy {
                    StrategyKind::RoundRobin => FamilyStrategy::RoundRobin,
                    StrategyKind::Greedy => FamilyStrategy::GreedyHeavy,
                },
                distribution: match self.family_dist {
                    FamilyDistKind::Optimal => FamilyDistribution::OptimalL2,
                    FamilyDistKind::Hreg => FamilyDistribution::HRegular(self.h.weight()),
                    FamilyDistKind::Uniform => FamilyDistribution::Uniform,
                },
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct VarianceArgs {
    #[arg(long, default_value_t = 6)]
    pub d: usize,
    /// One output row per listed sampler.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "exact,uniform,hreg,family")]
    pub sampler: Vec<SamplerKind>,
    #[command(flatten)]
    pub sampling: SamplerArgs,
    /// Number of draws for the empirical columns.
    #[arg(long, default_value_t = 100_000)]
    pub draws: usize,
    /// Read Omega from a matrix file instead of drawing it.
    #[arg(long)]
    pub omega: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Integrator for the sorting benchmark: `stochastic` or an exponential backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegratorChoice {
    Stochastic,
    Exact(ExpBackend),
}

impl IntegratorChoice {
    pub fn backend_label(self) -> String {
        match self {
            IntegratorChoice::Stochastic => "givens".into(),
            IntegratorChoice::Exact(b) => backend_label(b),
        }
    }
}

pub fn backend_label(b: ExpBackend) -> String {
    match b {
        ExpBackend::PadeScalingSquaring => "pade".into(),
        ExpBackend::TaylorTruncated(t) => format!("taylor:{t}"),
        ExpBackend::ClosedForm2x2 => "closed2x2".into(),
    }
}

pub fn parse_backend(s: &str) -> std::result::Result<ExpBackend, String> {
    match s {
        "pade" => Ok(ExpBackend::PadeScalingSquaring),
        "closed2x2" => Ok(ExpBackend::ClosedForm2x2),
        _ => {
            let t = s.strip_prefix("taylor:").ok_or_else(|| format!("unknown backend {s:?}"))?;
            let terms: u32 = t.parse().map_err(|_| format!("bad Taylor order {t:?}"))?;
            if terms == 0 {
                return Err("Taylor order must be at least 1".into());
            }
            Ok(ExpBackend::TaylorTruncated(terms))
        }
    }
}

impl FromStr for IntegratorChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "stochastic" => Ok(IntegratorChoice::Stochastic),
            other => parse_backend(other).map(IntegratorChoice::Exact),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QKind {
    Ranks,
    Uniform,
}

impl QKind {
    pub fn distribution(self) -> QDistribution {
        match self {
            QKind::Ranks => QDistribution::ShuffledRanks,
            QKind::Uniform => QDistribution::Uniform,
        }
    }
}

#[derive(Debug, Args)]
pub struct SortflowArgs {
    #[arg(long, default_value_t = 16)]
    pub d: usize,
    #[arg(long, value_delimiter = ',', default_values_t = TABLE_ETAS)]
    pub etas: Vec<f64>,
    /// `stochastic`, `pade`, `taylor:<T>` or `closed2x2`.
    #[arg(long = "backend", visible_alias = "integrators", value_delimiter = ',', default_value = "stochastic,pade,taylor:2")]
    pub integrators: Vec<IntegratorChoice>,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    /// Fixed step count in place of ceil(50 / eta).
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long, value_enum, default_value_t = QKind::Ranks)]
    pub q_dist: QKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveKind {
    Procrustes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Schedule {
    Constant,
    Invsqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RetractionKind {
    Exp,
    Cayley,
}

impl RetractionKind {
    pub fn retraction(self) -> Retraction {
        match self {
            RetractionKind::Exp => Retraction::Exp,
            RetractionKind::Cayley => Retraction::Cayley,
        }
    }
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long, value_enum, default_value_t = ObjectiveKind::Procrustes)]
    pub objective: ObjectiveKind,
    /// Target matrix file; a Gaussian `d x d` target when omitted.
    #[arg(long)]
    pub a: Option<PathBuf>,
    #[arg(long, default_value_t = 16)]
    pub d: usize,
    #[arg(long, value_enum, default_value_t = SamplerKind::Uniform)]
    pub sampler: SamplerKind,
    #[command(flatten)]
    pub sampling: SamplerArgs,
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    #[arg(long, value_enum, default_value_t = Schedule::Invsqrt)]
    pub schedule: Schedule,
    #[arg(long, value_enum, default_value_t = RetractionKind::Exp)]
    pub retraction: RetractionKind,
    #[arg(long, default_value_t = 1000)]
    pub iters: usize,
    /// Record wall-clock step times; otherwise the column is zero.
    #[arg(long)]
    pub timing: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, default_value_t = 6)]
    pub d: usize,
    #[arg(long, value_enum, default_value_t = SamplerKind::Hreg)]
    pub sampler: SamplerKind,
    #[command(flatten)]
    pub sampling: SamplerArgs,
    #[arg(long)]
    pub omega: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(CliError::Arg(format!("d must be at least 2, got {d}")));
    }
    Ok(())
}
