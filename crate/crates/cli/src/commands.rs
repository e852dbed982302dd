use std::time::Instant;

use num_bigint::BigUint;
use orthoflow::flows::{run_sorting_benchmark, SortingBenchmark, SortingIntegrator};
use orthoflow::integrator::{estimator_stats, optimize, Clock, NullClock, SamplerSpec, StepConfig, StepSize};
use orthoflow::manifold::{random_orthogonal, random_stiefel};
use orthoflow::objective::Procrustes;
use orthoflow::rng::{derive, standard_normal};
use orthoflow::sampling::{
    build_nonintersecting_family, count_partitions, edge_multiplicity, family_variance, hregular_variance_enumerated,
    uniform_partition_variance, uniform_scale, SkewEstimate, WeightFunction, ENUMERATION_CAP,
};
use orthoflow::{ManifoldKind, ManifoldPoint, Matrix, SkewSymmetric};
use serde_json::{json, Value};

use crate::args::{
    check_dim, IntegratorChoice, OptimizeArgs, SampleArgs, SamplerKind, Schedule, SortflowArgs, VarianceArgs,
};
use crate::error::{CliError, Result};
use crate::matrix_io::read_matrix;
use crate::table::{Cell, Table};

pub struct Counts {
    pub partitions: BigUint,
    pub multiplicity: BigUint,
    pub scale: f64,
}

impl Counts {
    pub fn line(&self) -> String {
        format!("|T_s|={} W={} scale={}", self.partitions, self.multiplicity, self.scale)
    }

    pub fn to_json(&self) -> Value {
        // exact integers can outgrow JSON numbers, so they go out as strings
        json!({ "partitions": self.partitions.to_string(), "multiplicity": self.multiplicity.to_string(), "scale": self.scale })
    }
}

pub fn counts(d: usize, s: usize) -> Result<Counts> {
    Ok(Counts { partitions: count_partitions(d, s)?, multiplicity: edge_multiplicity(d, s)?, scale: uniform_scale(d, s)? })
}

fn load_omega(path: Option<&std::path::Path>, d: usize, seed: u64) -> Result<SkewSymmetric> {
    match path {
        Some(p) => Ok(SkewSymmetric::new(read_matrix(p)?)?),
        None => {
            check_dim(d)?;
            Ok(SkewSymmetric::random(d, &mut derive(seed, 0)))
        }
    }
}

fn sampler_name(kind: SamplerKind) -> &'static str {
    match kind {
        SamplerKind::Exact => "exact",
        SamplerKind::Uniform => "uniform",
        SamplerKind::Hreg => "hreg",
        SamplerKind::Family => "family",
    }
}

/// Closed-form variance where one exists; h-regular sampling with a general
/// `h` falls back to enumerating `T_s` while that stays under the cap.
fn analytic_variance(omega: &SkewSymmetric, spec: &SamplerSpec) -> Result<Option<f64>> {
    Ok(match *spec {
        SamplerSpec::Exact => Some(0.0),
        SamplerSpec::UniformPartition { s } => Some(uniform_partition_variance(omega, s)?),
        SamplerSpec::HRegular { s, h: WeightFunction::Square, .. } => Some(uniform_partition_variance(omega, s)?),
        SamplerSpec::HRegular { s, h, .. } => {
            if count_partitions(omega.d(), s)? <= BigUint::from(ENUMERATION_CAP) {
                Some(hregular_variance_enumerated(omega, s, &h)?)
            } else {
                None
            }
        }
        SamplerSpec::Family { strategy, distribution } => {
            let family = build_nonintersecting_family(omega, strategy);
            Some(family_variance(omega, &family, &distribution)?)
        }
    })
}

pub fn variance(args: &VarianceArgs) -> Result<Table> {
    if args.draws == 0 {
        return Err(CliError::Arg("draws must be at least 1".into()));
    }
    let omega = load_omega(args.omega.as_deref(), args.d, args.seed)?;
    let mut table = Table::new(vec!["sampler", "d", "s", "analytic_var", "empirical_var", "bias"]);
    for (i, &kind) in args.sampler.iter().enumerate() {
        let spec = args.sampling.spec(kind);
        let analytic = analytic_variance(&omega, &spec)?;
        let stats = estimator_stats(&omega, &spec, args.draws, &mut derive(args.seed, 1 + i as u64))?;
        let s = match kind {
            SamplerKind::Uniform | SamplerKind::Hreg => Cell::Int(args.sampling.s as u64),
            SamplerKind::Family => Cell::Int(2),
            SamplerKind::Exact => Cell::Int(omega.d() as u64),
        };
        table.push(vec![
            sampler_name(kind).into(),
            omega.d().into(),
            s,
            analytic.into(),
            stats.empirical_var.into(),
            stats.mean_bias_fro.into(),
        ]);
    }
    Ok(table)
}

impl From<IntegratorChoice> for SortingIntegrator {
    fn from(c: IntegratorChoice) -> Self {
        match c {
            IntegratorChoice::Stochastic => SortingIntegrator::Stochastic,
            IntegratorChoice::Exact(b) => SortingIntegrator::Exact(b),
        }
    }
}

fn integrator_label(i: SortingIntegrator) -> String {
    match i {
        SortingIntegrator::Stochastic => IntegratorChoice::Stochastic.backend_label(),
        SortingIntegrator::Exact(b) => IntegratorChoice::Exact(b).backend_label(),
    }
}

pub fn sortflow(args: &SortflowArgs) -> Result<Table> {
    check_dim(args.d)?;
    if let Some(&bad) = args.etas.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(CliError::Arg(format!("every eta must be positive and finite, got {bad}")));
    }
    if args.trials == 0 {
        return Err(CliError::Arg("trials must be at least 1".into()));
    }
    if args.steps == Some(0) {
        return Err(CliError::Arg("steps must be at least 1".into()));
    }
    let config = SortingBenchmark {
        d: args.d,
        etas: args.etas.clone(),
        integrators: args.integrators.iter().map(|&c| c.into()).collect(),
        trials: args.trials,
        seed: args.seed,
        steps_override: args.steps,
        q_dist: args.q_dist.distribution(),
    };
    let mut table =
        Table::new(vec!["integrator", "backend", "eta", "trial", "steps", "epsilon", "inv_fraction", "diverged"]);
    for r in run_sorting_benchmark(&config)? {
        table.push(vec![
            r.integrator.name().into(),
            integrator_label(r.integrator).into(),
            r.eta.into(),
            r.trial.into(),
            r.steps.into(),
            r.epsilon.into(),
            r.inv_fraction.into(),
            r.diverged.into(),
        ]);
    }
    Ok(table)
}

struct WallClock(Instant);

impl Clock for WallClock {
    fn now_seconds(&mut self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// A random starting point on the component of the identity.
fn random_start(d: usize, k: usize, seed: u64) -> Result<ManifoldPoint> {
    let mut rng = derive(seed, 1);
    if k < d {
        return Ok(random_stiefel(d, k, &mut rng));
    }
    let mut m = random_orthogonal(d, &mut rng).into_matrix();
    if m.determinant()? < 0.0 {
        m.row_mut(0).iter_mut().for_each(|x| *x = -*x);
    }
    Ok(ManifoldPoint::new(m, ManifoldKind::SpecialOrthogonal)?)
}

pub fn optimize_trace(args: &OptimizeArgs) -> Result<Table> {
    let target = match &args.a {
        Some(path) => read_matrix(path)?,
        None => {
            check_dim(args.d)?;
            let mut rng = derive(args.seed, 0);
            Matrix::from_fn(args.d, args.d, |_, _| standard_normal(&mut rng))
        }
    };
    let (d, k) = target.shape();
    if k > d {
        return Err(CliError::Arg(format!("target must have at least as many rows as columns, got {d}x{k}")));
    }
    check_dim(d)?;
    let x0 = random_start(d, k, args.seed)?;
    let step = match args.schedule {
        Schedule::Constant => StepSize::Constant(args.eta),
        Schedule::Invsqrt => StepSize::InvSqrt(args.eta),
    };
    let config = StepConfig::new(step, args.retraction.retraction(), args.sampling.spec(args.sampler))?;
    let objective = Procrustes::new(target);
    let mut rng = derive(args.seed, 2);
    let trace = if args.timing {
        optimize(&objective, &x0, &config, args.iters, &mut rng, &mut WallClock(Instant::now()))?
    } else {
        optimize(&objective, &x0, &config, args.iters, &mut rng, &mut NullClock)?
    };
    let mut table = Table::new(vec!["iter", "objective", "grad_norm_sq", "orth_error", "trials", "step_seconds"]);
    for r in &trace.records {
        table.push(vec![
            r.iter.into(),
            r.objective.into(),
            r.grad_norm_sq.into(),
            r.orth_error.into(),
            r.trials.into(),
            r.step_seconds.into(),
        ]);
    }
    Ok(table)
}

pub fn estimate_json(est: &SkewEstimate, trials: u64) -> Value {
    let blocks: Vec<Value> = est
        .blocks()
        .iter()
        .map(|b| {
            let m = b.data();
            let rows: Vec<Vec<f64>> = (0..m.rows()).map(|i| m.row(i).to_vec()).collect();
            json!({ "vertices": b.vertices(), "entries": rows })
        })
        .collect();
    json!({ "d": est.d(), "scale": est.scale(), "trials": trials, "blocks": blocks })
}

pub fn sample(args: &SampleArgs) -> Result<Value> {
    let omega = load_omega(args.omega.as_deref(), args.d, args.seed)?;
    let spec = args.sampling.spec(args.sampler);
    let (est, trials) = orthoflow::integrator::draw_estimate(&omega, &spec, &mut derive(args.seed, 1))?;
    Ok(estimate_json(&est, trials))
}
