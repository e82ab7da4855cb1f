//! Seeded multi-run experiments.
//!
//! Run `n` of an experiment draws every random number (pair selection and
//! duel outcomes) from one [`DuelRng`] seeded with
//! `run_seed(config.seed, n)`. Runs are independent and may execute on any
//! number of worker threads; results are collected by run index and
//! aggregated with an order-independent merge, so the output bytes depend
//! only on the configuration.

mod config;
pub mod presets;

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

pub use config::{CheckpointSpec, EnvSpec, ExperimentConfig, GammaMode, GammaSpec, PolicySpec};

use crate::environments::{EnvError, Environment};
use crate::io::format_real;
use crate::metrics::{
    aggregate, halved_regret_bound, log_checkpoints, AggregateCurve, BoundParams, Checkpoint,
    MetricsError, RunRecord,
};
use crate::policy::DuelingPolicy;
use crate::prefmat::PrefMatError;
use crate::reduction::{run_reduction, BernoulliBandit, ReductionError};
use crate::rex3::{GmaxRule, Rex3, Rex3Error};
use crate::rng::{run_rng, run_seed, DuelRng};

/// Environment variable capping the number of worker threads.
pub const WORKERS_ENV: &str = "DUELBENCH_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("policy expects {policy} arms but the environment has {environment}")]
    ArmCountMismatch { policy: usize, environment: usize },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Matrix(#[from] PrefMatError),
    #[error(transparent)]
    Rex3(#[from] Rex3Error),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

/// Worker count from `DUELBENCH_WORKERS`, else the machine's parallelism.
pub fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn par_runs<T, F>(runs: usize, workers: usize, f: F) -> Result<Vec<T>, HarnessError>
where
    T: Send,
    F: Fn(u64) -> Result<T, HarnessError> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::ConfigInvalid(format!("thread pool: {e}")))?;
    pool.install(|| (0..runs as u64).into_par_iter().map(&f).collect())
}

/// Plays one run of `horizon` duels and samples it on `grid`.
pub fn run_single(
    policy: &mut dyn DuelingPolicy,
    env: &dyn Environment,
    horizon: u64,
    grid: &[u64],
    rng: &mut DuelRng,
) -> Result<Vec<Checkpoint>, HarnessError> {
    let istar = env.best_arm();
    let mut checkpoints = Vec::with_capacity(grid.len());
    let mut next = grid.iter().peekable();
    let mut cumulative = 0.0;
    let mut hits = 0u64;
    for t in 1..=horizon {
        let (a, b) = policy.select_pair(rng);
        let fb = env.duel(a, b, t, rng)?;
        policy.update(a, b, fb.psi);
        cumulative += fb.regret;
        let hit = istar.is_some() && fb.hit;
        hits += u64::from(hit);
        if next.peek() == Some(&&t) {
            next.next();
            checkpoints.push(Checkpoint {
                t,
                cumulative_regret: cumulative,
                hit,
                hit_count: hits,
            });
        }
    }
    Ok(checkpoints)
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub records: Vec<RunRecord>,
    pub curve: AggregateCurve,
}

impl ExperimentResult {
    pub fn final_regrets(&self) -> Vec<f64> {
        self.records.iter().map(RunRecord::final_regret).collect()
    }

    pub fn mean_final_regret(&self) -> f64 {
        self.curve.last().map_or(0.0, |p| p.mean)
    }

    pub fn to_csv_string(&self) -> String {
        self.curve.to_csv_string()
    }
}

/// Runs every seeded run of `config` without touching the filesystem.
pub fn simulate(config: &ExperimentConfig) -> Result<ExperimentResult, HarnessError> {
    simulate_with_workers(config, worker_count())
}

pub fn simulate_with_workers(
    config: &ExperimentConfig,
    workers: usize,
) -> Result<ExperimentResult, HarnessError> {
    config.validate()?;
    let env = config.environment.build()?;
    let k = env.arms();
    if let Some(expected) = config.arms {
        if expected != k {
            return Err(HarnessError::ArmCountMismatch {
                policy: expected,
                environment: k,
            });
        }
    }
    // Build once up front so policy errors surface before any run starts.
    let probe = config.policy.build(k, config.horizon)?;
    if probe.arms() != k {
        return Err(HarnessError::ArmCountMismatch {
            policy: probe.arms(),
            environment: k,
        });
    }
    let grid = log_checkpoints(config.horizon, config.checkpoints.per_decade);
    let policy_id = config.policy.id();
    let env_id = config.environment.id();
    let env_ref: &dyn Environment = env.as_ref();
    let records = par_runs(config.runs, workers, |n| {
        let mut policy = config.policy.build(k, config.horizon)?;
        let mut rng = run_rng(config.seed, n);
        let checkpoints = run_single(policy.as_mut(), env_ref, config.horizon, &grid, &mut rng)?;
        Ok(RunRecord {
            seed: run_seed(config.seed, n),
            policy: policy_id.clone(),
            environment: env_id.clone(),
            checkpoints,
        })
    })?;
    let curve = aggregate(&records)?;
    Ok(ExperimentResult { records, curve })
}

/// Runs the experiment and writes the aggregate CSV to `config.output` when set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult, HarnessError> {
    let result = simulate(config)?;
    if let Some(path) = &config.output {
        write_file(path, &result.to_csv_string())?;
    }
    Ok(result)
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub gamma: f64,
    pub mean_regret: f64,
    pub min_regret: f64,
    pub max_regret: f64,
    /// Halved bound with `G_max = T/2`; `None` when `γ > 1/2`.
    pub bound_gmax_half: Option<f64>,
    /// Halved bound with `G_max = T/4`.
    pub bound_gmax_quarter: Option<f64>,
}

pub const SWEEP_CSV_HEADER: &str =
    "gamma,mean_regret,min_regret,max_regret,halved_bound_gmax_half,halved_bound_gmax_quarter";

pub fn sweep_csv_string(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    let opt = |v: Option<f64>| v.map(format_real).unwrap_or_default();
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            format_real(r.gamma),
            format_real(r.mean_regret),
            format_real(r.min_regret),
            format_real(r.max_regret),
            opt(r.bound_gmax_half),
            opt(r.bound_gmax_quarter)
        );
    }
    out
}

/// Halved regret bound for a horizon with `G_max = rule(T)` and `G_min = 0`.
pub fn halved_bound_for(k: usize, gamma: f64, horizon: u64, rule: GmaxRule) -> Option<f64> {
    BoundParams::new(k, gamma, rule.estimate(horizon as f64), 0.0)
        .ok()
        .map(|bp| halved_regret_bound(&bp))
}

/// Final cumulative regret of REX3 at each fixed `γ`, next to the halved
/// bounds for `G_max = T/2` and `G_max = T/4`.
pub fn gamma_sweep(
    config: &ExperimentConfig,
    gammas: &[f64],
) -> Result<Vec<SweepRow>, HarnessError> {
    if let Some(g) = gammas.iter().find(|g| !(**g > 0.0 && **g <= 1.0)) {
        return Err(HarnessError::ConfigInvalid(format!(
            "sweep gamma {g} outside (0, 1]"
        )));
    }
    let k = config.environment.build()?.arms();
    gammas
        .iter()
        .map(|&gamma| {
            let mut cfg = config.clone();
            cfg.policy = PolicySpec::rex3(GammaSpec::Fixed(gamma), GmaxRule::Half);
            cfg.output = None;
            let result = simulate(&cfg)?;
            let last = *result.curve.last().ok_or(MetricsError::NoRuns)?;
            Ok(SweepRow {
                gamma,
                mean_regret: last.mean,
                min_regret: last.min,
                max_regret: last.max,
                bound_gmax_half: halved_bound_for(k, gamma, config.horizon, GmaxRule::Half),
                bound_gmax_quarter: halved_bound_for(k, gamma, config.horizon, GmaxRule::Quarter),
            })
        })
        .collect()
}

/// Repeated runs of the classical-bandit reduction driven by REX3.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionExperiment {
    pub means: Vec<f64>,
    /// Classical steps per run.
    pub horizon: u64,
    pub runs: usize,
    pub seed: u64,
    pub gamma: GammaSpec,
    pub gmax: GmaxRule,
    pub per_decade: u32,
}

/// Aggregates the classical pseudo-regret of every run. Checkpoint `t` counts
/// classical pulls; a hit is an iteration that pulled the best arm twice.
pub fn run_reduction_experiment(
    cfg: &ReductionExperiment,
) -> Result<ExperimentResult, HarnessError> {
    if cfg.runs < 1 {
        return Err(HarnessError::ConfigInvalid(
            "runs must be at least 1".into(),
        ));
    }
    let bandit = BernoulliBandit::new(cfg.means.clone())?;
    let k = bandit.arms();
    let iterations = cfg.horizon.div_ceil(2);
    let grid = log_checkpoints(iterations, cfg.per_decade);
    let best = (0..k)
        .find(|&i| bandit.means()[i] == bandit.best_mean())
        .expect("non-empty");
    let records = par_runs(cfg.runs, worker_count(), |n| {
        // Duel count per run is ceil(T/2), so the dueling learner is tuned for it.
        let mut dba = Rex3::new(k, cfg.gamma.schedule(iterations, cfg.gmax))?;
        let mut rng = run_rng(cfg.seed, n);
        let trace = run_reduction(&mut dba, &bandit, cfg.horizon, &mut rng)?;
        let curve = trace.pseudo_regret_curve(&bandit);
        let mut hits = 0u64;
        let mut next = 0usize;
        let mut checkpoints = Vec::with_capacity(grid.len());
        for (i, step) in trace.steps.iter().enumerate() {
            let hit = step.a == best && step.b == best;
            hits += u64::from(hit);
            let iter = i as u64 + 1;
            if grid.get(next) == Some(&iter) {
                next += 1;
                checkpoints.push(Checkpoint {
                    t: 2 * iter,
                    cumulative_regret: curve[i],
                    hit,
                    hit_count: hits,
                });
            }
        }
        Ok(RunRecord {
            seed: run_seed(cfg.seed, n),
            policy: dba.name(),
            environment: format!("bernoulli{k}"),
            checkpoints,
        })
    })?;
    let curve = aggregate(&records)?;
    Ok(ExperimentResult { records, curve })
}
