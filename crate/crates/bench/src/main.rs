use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rsbq_bench::{run, BenchError, ConfigIssue, ExperimentConfig, ExperimentKind, RunOptions};

#[derive(Parser)]
#[command(name = "rsbq", version, about = "Rotation-symmetric bosonic code experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// First-order Knill-Laflamme verdicts
    KlCheck(Args),
    /// Optimal-recovery fidelity over codes and noise strengths
    Sweep(Args),
    /// Optimal recovery for each code and strength, with solver certificates
    Sdp(Args),
    /// Infidelity over the encoding angles
    Landscape(Args),
    /// Joint phase distributions of the dual words
    PhaseDist(Args),
    /// Correlated-dephasing correction circuit
    CorrDemo(Args),
    /// Logical gate matrices and teleported gates
    Gates(Args),
}

#[derive(clap::Args)]
struct Args {
    /// Experiment JSON; the built-in preset is used when absent
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn load(kind: ExperimentKind, args: &Args) -> Result<ExperimentConfig, BenchError> {
    let Some(path) = &args.config else {
        return Ok(ExperimentConfig::preset(kind));
    };
    let text = fs::read_to_string(path)
        .map_err(|e| BenchError::Config(vec![ConfigIssue::new("--config", format!("{}: {e}", path.display()))]))?;
    let cfg = ExperimentConfig::from_json(&text).map_err(BenchError::Config)?;
    if cfg.experiment != kind {
        return Err(BenchError::Config(vec![ConfigIssue::new(
            "experiment",
            format!("config is for {}, subcommand is {}", cfg.experiment.as_str(), kind.as_str()),
        )]));
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::KlCheck(a) => (ExperimentKind::KlCheck, a),
        Command::Sweep(a) => (ExperimentKind::Sweep, a),
        Command::Sdp(a) => (ExperimentKind::Sdp, a),
        Command::Landscape(a) => (ExperimentKind::Landscape, a),
        Command::PhaseDist(a) => (ExperimentKind::PhaseDist, a),
        Command::CorrDemo(a) => (ExperimentKind::CorrDemo, a),
        Command::Gates(a) => (ExperimentKind::Gates, a),
    };
    if let Some(n) = args.threads {
        if n == 0 || rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            eprintln!("{}", serde_json::json!({ "errors": [ConfigIssue::new("--threads", "must be a positive thread count")] }));
            return ExitCode::from(2);
        }
    }
    let result = load(kind, args).and_then(|cfg| run(&cfg, &RunOptions { out: args.out.clone(), seed: args.seed }));
    match result {
        Ok(outcome) => {
            println!("{}", serde_json::to_string_pretty(&outcome.summary["result"]).unwrap_or_default());
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(BenchError::Config(issues)) => {
            eprintln!("{}", serde_json::to_string_pretty(&serde_json::json!({ "errors": issues })).unwrap_or_default());
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
