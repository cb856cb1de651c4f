use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dirac_cli::config::Overrides;
use dirac_cli::{execute, parse_config, Mode};

/// Output directory used when neither `--out` nor the config names one.
const OUT_DIR_ENV: &str = "DIRAC_OUT_DIR";
const FALLBACK_OUT_DIR: &str = "dirac-out";

#[derive(Parser)]
#[command(name = "dirac", version, about = "Dirac-mean experiments: estimates, certificates, oracles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the mode named in the config.
    Run(Common),
    /// Dirac mean of the configured function, source and policy.
    Estimate(Common),
    /// Chi-square equidistribution over the projection hierarchy.
    Certify(Common),
    /// Quadrature reference value.
    Oracle(Common),
    /// Second-moment Fresnel estimates over increasing regularizer widths.
    FresnelScan(Common),
    /// Estimate and oracle with a tolerance verdict.
    Compare(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment description (TOML, or JSON when it starts with `{`).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory [default: config, then $DIRAC_OUT_DIR, then ./dirac-out]
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    budget: Option<u64>,
    /// Number of index blocks evaluated in parallel (1 = sequential).
    #[arg(long, value_name = "K")]
    blocks: Option<usize>,
    /// Seed of a pseudorandom source.
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, args) = match cli.command {
        Command::Run(a) => (None, a),
        Command::Estimate(a) => (Some(Mode::Estimate), a),
        Command::Certify(a) => (Some(Mode::Certify), a),
        Command::Oracle(a) => (Some(Mode::Oracle), a),
        Command::FresnelScan(a) => (Some(Mode::FresnelScan), a),
        Command::Compare(a) => (Some(Mode::Compare), a),
    };

    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return ExitCode::from(1);
        }
    };
    let mut config = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return ExitCode::from(1);
        }
    };
    let overrides = Overrides {
        mode,
        budget: args.budget,
        blocks: args.blocks,
        seed: args.seed,
        out_dir: args.out,
    };
    if let Err(e) = config.apply(&overrides) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if config.output.dir.is_none() {
        let dir = std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from(FALLBACK_OUT_DIR), PathBuf::from);
        config.output.dir = Some(dir);
    }
    let out_dir = config.output.dir.clone().expect("resolved above");

    match execute(&config, &out_dir) {
        Ok(run) => {
            let result = &run.summary["result"];
            eprintln!(
                "{}: {:?} (exit {}), summary in {}",
                config.mode.as_str(),
                run.outcome,
                run.outcome.exit_code(),
                run.summary_path.display()
            );
            let shown = result
                .get("final_estimate")
                .or_else(|| result.pointer("/estimate/final_estimate"))
                .or_else(|| result.get("value"));
            if let Some(est) = shown {
                println!("{est}");
            }
            ExitCode::from(run.outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
