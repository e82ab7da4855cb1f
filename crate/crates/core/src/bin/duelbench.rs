use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use duelbench_core::harness::presets::{preset, Preset, SweepPreset, PRESET_NAMES};
use duelbench_core::harness::{
    gamma_sweep, sweep_csv_string, write_file, ExperimentConfig, GammaMode, GammaSpec,
};
use duelbench_core::io::format_real;
use duelbench_core::reduction::{run_reduction, BernoulliBandit};
use duelbench_core::rex3::{GmaxRule, Rex3};
use duelbench_core::rng::seeded;
use duelbench_core::PreferenceMatrix;

#[derive(Parser)]
#[command(
    name = "duelbench",
    version,
    about = "Adversarial dueling bandit experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its aggregate regret curve.
    Run(RunArgs),
    /// Sweep fixed REX3 exploration rates and compare against the bound.
    Sweep(SweepArgs),
    /// Generate or inspect a preference matrix.
    Matrix(MatrixArgs),
    /// Play a Bernoulli bandit through the dueling reduction and dump the trace.
    Reduce(ReduceArgs),
    /// List the shipped presets.
    Presets,
}

#[derive(Args)]
struct Source {
    /// Experiment config (TOML).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named preset, see `duelbench presets`.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    /// Output CSV; defaults to the config's `output`, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    source: Source,
    /// Comma-separated rates; `opt` adds the bound-optimal rate for G_max = T/2.
    #[arg(long, value_delimiter = ',', required = true)]
    gammas: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Generator {
    Savage,
    Bvs,
    Utilities,
}

#[derive(Args)]
struct MatrixArgs {
    #[arg(long, conflicts_with = "input")]
    generate: Option<Generator>,
    /// Existing matrix CSV to validate.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    /// Comma-separated Bernoulli means for `--generate utilities`.
    #[arg(long, value_delimiter = ',')]
    means: Vec<f64>,
    /// Print Borda, Copeland and Condorcet winner to stderr.
    #[arg(long)]
    summary: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    /// Comma-separated arm means.
    #[arg(long, value_delimiter = ',', conflicts_with = "k")]
    means: Vec<f64>,
    /// Arm count for a single best arm at `--best`, others `--gap` below.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0.6)]
    best: f64,
    #[arg(long, default_value_t = 0.1)]
    gap: f64,
    /// Classical steps.
    #[arg(long, default_value_t = 10_000)]
    horizon: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fixed exploration rate; adaptive when omitted.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

type CliResult = Result<(), Box<dyn std::error::Error>>;

fn load_source(source: &Source) -> Result<Preset, Box<dyn std::error::Error>> {
    let base = match (&source.config, &source.preset) {
        (Some(path), _) => {
            let cfg = ExperimentConfig::load(path)?;
            Preset::Experiment(cfg)
        }
        (None, Some(name)) => preset(name).ok_or_else(|| format!("unknown preset `{name}`"))?,
        (None, None) => return Err("one of --config or --preset is required".into()),
    };
    Ok(base.with_overrides(source.runs, source.horizon, source.seed))
}

fn emit(text: &str, out: Option<&Path>) -> CliResult {
    match out {
        Some(path) => write_file(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_run(args: RunArgs) -> CliResult {
    let preset = load_source(&args.source)?;
    let fallback = match &preset {
        Preset::Experiment(cfg) => cfg.output.clone(),
        _ => None,
    };
    let csv = preset.run_csv()?;
    emit(&csv, args.out.or(fallback).as_deref())
}

fn cmd_sweep(args: SweepArgs) -> CliResult {
    let mut sweep = match load_source(&args.source)? {
        Preset::Experiment(config) => SweepPreset {
            config,
            gammas: Vec::new(),
            include_optimal: false,
        },
        Preset::Sweep(s) => s,
        Preset::Reduction(_) => return Err("the reduction preset cannot be swept".into()),
    };
    sweep.gammas.clear();
    sweep.include_optimal = false;
    for g in &args.gammas {
        match g.trim() {
            "opt" | "optimal" => sweep.include_optimal = true,
            text => sweep
                .gammas
                .push(text.parse().map_err(|_| format!("bad gamma `{text}`"))?),
        }
    }
    let rows = gamma_sweep(&sweep.config, &sweep.resolved_gammas()?)?;
    emit(&sweep_csv_string(&rows), args.out.as_deref())
}

fn cmd_matrix(args: MatrixArgs) -> CliResult {
    let m = match (args.generate, &args.input) {
        (Some(Generator::Savage), _) => {
            PreferenceMatrix::savage(args.k.ok_or("--k is required for savage")?)?
        }
        (Some(Generator::Bvs), _) => PreferenceMatrix::bvs(),
        (Some(Generator::Utilities), _) => PreferenceMatrix::from_utilities(&args.means)?,
        (None, Some(path)) => PreferenceMatrix::load(path)?,
        (None, None) => return Err("one of --generate or --input is required".into()),
    };
    if args.summary {
        let s = m.summary();
        let borda: Vec<String> = s.borda.iter().map(|&b| format_real(b)).collect();
        let copeland: Vec<String> = s.copeland.iter().map(|c| c.to_string()).collect();
        eprintln!("k {}", m.k());
        eprintln!("borda {}", borda.join(","));
        eprintln!("copeland {}", copeland.join(","));
        match s.condorcet_winner {
            Some(w) => eprintln!("condorcet_winner {w}"),
            None => eprintln!("condorcet_winner none"),
        }
    }
    if args.input.is_some() && args.out.is_none() {
        return Ok(());
    }
    emit(&m.to_csv_string(), args.out.as_deref())
}

fn cmd_reduce(args: ReduceArgs) -> CliResult {
    let bandit = match args.k {
        Some(k) => BernoulliBandit::with_gap(k, args.best, args.gap)?,
        None if args.means.is_empty() => return Err("one of --means or --k is required".into()),
        None => BernoulliBandit::new(args.means)?,
    };
    let gamma = match args.gamma {
        Some(g) => GammaSpec::Fixed(g),
        None => GammaSpec::Mode(GammaMode::Adaptive),
    };
    let mut learner = Rex3::new(bandit.arms(), gamma.schedule(args.horizon, GmaxRule::Half))?;
    let trace = run_reduction(&mut learner, &bandit, args.horizon, &mut seeded(args.seed))?;
    eprintln!(
        "classical_gain {} pseudo_regret {}",
        format_real(trace.classical_gain),
        format_real(trace.pseudo_regret(&bandit))
    );
    emit(&trace.to_csv_string(), args.out.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Matrix(a) => cmd_matrix(a),
        Command::Reduce(a) => cmd_reduce(a),
        Command::Presets => {
            for name in PRESET_NAMES {
                println!("{name}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("duelbench: {e}");
            ExitCode::FAILURE
        }
    }
}
