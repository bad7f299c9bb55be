use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use colwalk::harness::{
    emit_report, run_experiment, simulate_ensemble, validate, ExperimentConfig, HarnessError,
    OutputFormat,
};
use colwalk::statistics::{targets_of, ModelKind, Verdict};
use colwalk::walk::{write_trajectory_csv, Checkpoint, WalkState};
use colwalk::{LawSpec, Model, ModelSpec, ProfileSpec, TheoryTargets};

#[derive(Parser)]
#[command(name = "colwalk", version, about = "Simulate column random walks and check their limit laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the closed-form limits of a model without simulating.
    Targets(TargetArgs),
    /// Simulate an ensemble and write per-replicate checkpoint summaries.
    Simulate(RunArgs),
    /// Run the configured test battery and write a report.
    Verify(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicates: Option<u64>,
    #[arg(long)]
    steps: Option<u64>,
    /// Worker threads; 0 uses one per core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Heyde,
    Env,
}

#[derive(Args)]
struct TargetArgs {
    /// Read the model from a config file instead of flags.
    #[arg(long, conflicts_with = "model")]
    config: Option<PathBuf>,
    #[arg(long, value_enum, required_unless_present = "config")]
    model: Option<ModelArg>,
    /// Connected-column density of an iid environment.
    #[arg(long)]
    q: Option<f64>,
    /// Period of the uniform fixed profile.
    #[arg(long = "L", alias = "period")]
    period: Option<usize>,
    /// Explicit fixed profile, comma separated.
    #[arg(long, value_delimiter = ',')]
    probs: Option<Vec<f64>>,
    /// Periodic environment pattern of 0/1 digits, comma separated.
    #[arg(long, value_delimiter = ',')]
    pattern: Option<Vec<u8>>,
    #[arg(long, requires = "p10")]
    p01: Option<f64>,
    #[arg(long, requires = "p01")]
    p10: Option<f64>,
}

/// Failure that maps to exit status 2.
struct UsageError(String);

impl From<HarnessError> for UsageError {
    fn from(e: HarnessError) -> Self {
        UsageError(e.to_string())
    }
}

fn model_from_flags(a: &TargetArgs) -> Result<ModelSpec, UsageError> {
    if let Some(path) = &a.config {
        return Ok(ExperimentConfig::load(path)?.model);
    }
    match a.model {
        Some(ModelArg::Heyde) => {
            let profile = match (&a.probs, a.period) {
                (Some(probs), None) => ProfileSpec::Explicit { probs: probs.clone() },
                (None, Some(period)) => ProfileSpec::Uniform { period },
                _ => return Err(UsageError("heyde needs exactly one of --L or --probs".into())),
            };
            Ok(ModelSpec::Heyde { profile })
        }
        Some(ModelArg::Env) => {
            let law = match (a.q, &a.pattern, a.p01.zip(a.p10)) {
                (Some(q), None, None) => LawSpec::Iid { q },
                (None, Some(pattern), None) => LawSpec::Periodic { pattern: pattern.clone() },
                (None, None, Some((p01, p10))) => LawSpec::Markov { p01, p10 },
                _ => return Err(UsageError("env needs exactly one of --q, --pattern or --p01/--p10".into())),
            };
            Ok(ModelSpec::Env { law })
        }
        None => Err(UsageError("--model is required".into())),
    }
}

fn print_targets(t: &TheoryTargets) {
    let opt = |name: &str, v: Option<f64>| match v {
        Some(v) => println!("{name}={v:.6}"),
        None => println!("{name}=n/a"),
    };
    let kind = match t.kind {
        ModelKind::Heyde => "heyde",
        ModelKind::Env => "env",
    };
    println!("model={kind}");
    opt("gamma", t.gamma);
    opt("q", t.q);
    for (name, v) in [
        ("hfrac", t.hfrac),
        ("vfrac", t.vfrac),
        ("var_x", t.var_x),
        ("var_y", t.var_y),
        ("lil_x", t.lil_x),
        ("lil_y", t.lil_y),
        ("ellipse_a", t.ellipse_a),
        ("ellipse_b", t.ellipse_b),
        ("anisotropy", t.anisotropy),
    ] {
        println!("{name}={v:.6}");
    }
    opt("qn_const", t.qn_const);
    opt("rn_const", t.rn_const);
    println!("integral_var_x={:.6}", t.integral_var_x);
    println!("integral_var_y={:.6}", t.integral_var_y);
}

fn targets(a: &TargetArgs) -> Result<ExitCode, UsageError> {
    let model = Model::from_spec(&model_from_flags(a)?).map_err(|e| UsageError(e.to_string()))?;
    print_targets(&targets_of(&model));
    Ok(ExitCode::SUCCESS)
}

fn load_config(a: &RunArgs) -> Result<ExperimentConfig, UsageError> {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if a.seed.is_some() {
        cfg.seed = a.seed;
    }
    if let Some(r) = a.replicates {
        cfg.replicates = r;
    }
    if let Some(n) = a.steps {
        cfg.steps = n;
    }
    if let Some(dir) = &a.out {
        cfg.output.dir = dir.clone();
    }
    if let Some(f) = a.format {
        cfg.output.format = f;
    }
    Ok(cfg)
}

#[derive(Serialize)]
struct ReplicateRecord<'a> {
    replicate: u64,
    end: WalkState,
    max_x: i64,
    max_y: i64,
    checkpoints: &'a [Checkpoint],
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), UsageError> {
    fs::write(path, bytes).map_err(|e| UsageError(format!("{}: {e}", path.display())))
}

fn simulate(a: &RunArgs) -> Result<ExitCode, UsageError> {
    let cfg = load_config(a)?;
    let (model, seed, cps) = validate(&ExperimentConfig { tests: Vec::new(), ..cfg.clone() })?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.workers)
        .build()
        .map_err(|e| UsageError(e.to_string()))?;
    let runs = pool.install(|| simulate_ensemble(&model, cfg.steps, &cps, seed, cfg.replicates))?;
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir).map_err(|e| UsageError(format!("{}: {e}", dir.display())))?;
    match cfg.output.format {
        OutputFormat::Json => {
            let records: Vec<ReplicateRecord> = runs
                .iter()
                .enumerate()
                .map(|(r, s)| ReplicateRecord {
                    replicate: r as u64,
                    end: s.end,
                    max_x: s.max_x,
                    max_y: s.max_y,
                    checkpoints: &s.checkpoints,
                })
                .collect();
            let mut json = serde_json::to_vec_pretty(&records).map_err(|e| UsageError(e.to_string()))?;
            json.push(b'\n');
            write_file(&dir.join("trajectories.json"), &json)?;
        }
        OutputFormat::Csv => {
            for (r, s) in runs.iter().enumerate() {
                let mut buf = Vec::new();
                write_trajectory_csv(s, &mut buf).expect("writing to memory");
                write_file(&dir.join(format!("trajectory_{r}.csv")), &buf)?;
            }
        }
    }
    println!("wrote {} replicates of {} steps to {}", runs.len(), cfg.steps, dir.display());
    Ok(ExitCode::SUCCESS)
}

fn verdict_str(v: Verdict) -> &'static str {
    if v.passed() {
        "pass"
    } else {
        "fail"
    }
}

fn verify(a: &RunArgs) -> Result<ExitCode, UsageError> {
    let cfg = load_config(a)?;
    let report = run_experiment(&cfg, a.workers)?;
    emit_report(&report, &cfg.output.dir, cfg.output.format)?;
    for t in &report.tests {
        println!("{:<20} {:<4} estimate={:.6} target={:.6}", t.name, verdict_str(t.verdict), t.estimate, t.target);
    }
    for e in &report.errors {
        println!("{:<20} error {}", e.test, e.message);
    }
    println!("verdict {} ({:.1}s)", verdict_str(report.verdict), report.wall_time_s);
    Ok(if report.verdict.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Targets(a) => targets(a),
        Command::Simulate(a) => simulate(a),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(code) => code,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
