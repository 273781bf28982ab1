use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use animat_core::config::{parse_config, parse_real, ConfigError, Violation};
use animat_core::harness::{self, HarnessError};
use animat_core::model::MotivationMode;
use animat_core::snapshot::load_snapshot;

#[derive(Parser)]
#[command(
    name = "animat",
    version,
    about = "Motivated neural agents in a 1-D world"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single scenario.
    Run(RunArgs),
    /// Run a grid of grass probabilities, motivation modes and replicate seeds.
    Sweep(SweepArgs),
    /// Classify the control schemes of a snapshot's population.
    Probe(ProbeArgs),
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Maximum number of iterations.
    #[arg(long)]
    iterations: Option<String>,
    /// Write an intermediate snapshot every N iterations (0 = never).
    #[arg(long = "snapshot-every")]
    snapshot_every: Option<String>,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    seed: Option<String>,
    /// Grass appearance probability, e.g. 0.005 or 1/200.
    #[arg(long)]
    pg: Option<String>,
    #[arg(long)]
    motivation: Option<String>,
    /// Continue from a snapshot instead of starting fresh.
    #[arg(long)]
    resume: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Master seed from which replicate seeds are derived.
    #[arg(long)]
    seed: Option<String>,
    /// Comma-separated grass probabilities.
    #[arg(long, default_value = "1/2000,1/200,1/20")]
    pg: String,
    /// Comma-separated modes.
    #[arg(long, default_value = "on,off")]
    motivation: String,
    /// Replicates per (P_g, mode) cell.
    #[arg(long, default_value_t = 10)]
    replicates: usize,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct ProbeArgs {
    snapshot: PathBuf,
    #[arg(long, default_value = "probe")]
    out: PathBuf,
}

fn overrides(
    common: &Common,
    extra: &[(&'static str, Option<&String>)],
) -> Result<Vec<(&'static str, String)>, HarnessError> {
    let mut out = Vec::new();
    let mut bad = Vec::new();
    for (key, value) in [
        (
            "output_directory",
            common.out.as_ref().map(|p| p.display().to_string()),
        ),
        ("max_iterations", common.iterations.clone()),
        ("snapshot_every", common.snapshot_every.clone()),
    ] {
        if let Some(v) = value {
            out.push((key, v));
        }
    }
    for (key, value) in extra {
        if let Some(v) = value {
            out.push((*key, (*v).clone()));
        }
    }
    for kv in &common.set {
        match kv.split_once('=') {
            Some((k, v)) => match animat_core::config::KEYS
                .iter()
                .find(|known| **known == k.trim())
            {
                Some(known) => out.push((known, v.to_string())),
                None => bad.push(Violation {
                    field: k.trim().to_string(),
                    message: "unknown key".into(),
                }),
            },
            None => bad.push(Violation {
                field: kv.clone(),
                message: "expected KEY=VALUE".into(),
            }),
        }
    }
    if bad.is_empty() {
        Ok(out)
    } else {
        Err(ConfigError::Invalid(bad).into())
    }
}

fn list<T>(
    s: &str,
    field: &str,
    parse: impl Fn(&str) -> Result<T, String>,
) -> Result<Vec<T>, HarnessError> {
    let mut values = Vec::new();
    let mut bad = Vec::new();
    for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        match parse(item) {
            Ok(v) => values.push(v),
            Err(message) => bad.push(Violation {
                field: field.into(),
                message,
            }),
        }
    }
    if values.is_empty() && bad.is_empty() {
        bad.push(Violation {
            field: field.into(),
            message: "list is empty".into(),
        });
    }
    if bad.is_empty() {
        Ok(values)
    } else {
        Err(ConfigError::Invalid(bad).into())
    }
}

fn run(args: RunArgs) -> Result<(), HarnessError> {
    if let Some(path) = &args.resume {
        let snapshot = load_snapshot(path)?;
        let out = args
            .common
            .out
            .clone()
            .unwrap_or_else(|| snapshot.config.output_directory.clone());
        let iterations = match &args.common.iterations {
            Some(s) => Some(s.parse().map_err(|_| {
                ConfigError::Invalid(vec![Violation {
                    field: "max_iterations".into(),
                    message: format!("not a non-negative integer: {s:?}"),
                }])
            })?),
            None => None,
        };
        let outcome = harness::resume_scenario(snapshot, iterations, &out)?;
        print_outcome(&outcome);
        return Ok(());
    }
    let ov = overrides(
        &args.common,
        &[
            ("seed", args.seed.as_ref()),
            ("grass_probability", args.pg.as_ref()),
            ("motivation", args.motivation.as_ref()),
        ],
    )?;
    let config = parse_config(args.common.config.as_deref(), &ov)?;
    let outcome = harness::run_scenario(&config)?;
    print_outcome(&outcome);
    Ok(())
}

fn print_outcome(o: &harness::RunOutcome) {
    for (k, v) in o.to_pairs() {
        println!("{k}={v}");
    }
}

fn sweep(args: SweepArgs) -> Result<(), HarnessError> {
    let ov = overrides(&args.common, &[("seed", args.seed.as_ref())])?;
    let base = parse_config(args.common.config.as_deref(), &ov)?;
    let pgs = list(&args.pg, "grass_probability", |s| {
        parse_real(s).and_then(|p| {
            if (0.0..=1.0).contains(&p) {
                Ok(p)
            } else {
                Err(format!("{s} outside [0, 1]"))
            }
        })
    })?;
    let modes = list(&args.motivation, "motivation", |s| {
        s.parse::<MotivationMode>()
    })?;
    if args.replicates == 0 {
        return Err(ConfigError::Invalid(vec![Violation {
            field: "replicates".into(),
            message: "must be at least 1".into(),
        }])
        .into());
    }
    let runs = harness::sweep_grid(&pgs, &modes, args.replicates, base.seed);
    let out = base.output_directory.clone();
    let go = || harness::sweep(&base, &runs, &out);
    let results = match args.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(go)?,
        None => go()?,
    };
    let failed = results.iter().filter(|r| r.is_err()).count();
    println!(
        "{} runs written to {} ({} failed)",
        results.len(),
        out.join(harness::SUMMARY_FILE).display(),
        failed
    );
    Ok(())
}

fn probe(args: ProbeArgs) -> Result<(), HarnessError> {
    let report = harness::probe_command(&args.snapshot, &args.out)?;
    print!("{}", report.summary);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
        Command::Probe(a) => probe(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
