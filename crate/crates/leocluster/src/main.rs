use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use leocluster::{run, Command, ExperimentSpec, SweepRange};

#[derive(Parser)]
#[command(name = "leocluster", version, about = "Outage and rate analysis of leader-follower LEO clusters")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Outage probability against the SINR threshold.
    OutageSweep(RunArgs),
    /// Average rate bounds against altitude.
    RateSweep(RunArgs),
    /// Lone leader versus leader with followers under one power budget.
    Casestudy(RunArgs),
    /// Monte Carlo against analysis; exits 3 on disagreement.
    Validate(RunArgs),
    /// KS distances of the contact-angle laws.
    Lemmas(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Override a config key, e.g. `--set gamma_th_db=-6`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    trials: Option<u64>,
    /// Swept key and range, e.g. `--sweep lf_power_dbw=-10:10:1`.
    #[arg(long, value_name = "KEY=START:STOP:STEP")]
    sweep: Option<String>,
    /// Absolute quadrature tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (command, args) = match cli.command {
        Cmd::OutageSweep(a) => (Command::OutageSweep, a),
        Cmd::RateSweep(a) => (Command::RateSweep, a),
        Cmd::Casestudy(a) => (Command::Casestudy, a),
        Cmd::Validate(a) => (Command::Validate, a),
        Cmd::Lemmas(a) => (Command::Lemmas, a),
    };
    let sweep = match args.sweep.as_deref().map(SweepRange::parse).transpose() {
        Ok(s) => s,
        Err(e) => {
            log::error!("{e}");
            return ExitCode::from(1);
        }
    };
    let spec = ExperimentSpec {
        command,
        config_path: args.config,
        output_path: args.out,
        overrides: args.overrides,
        seed: args.seed,
        trials: args.trials,
        sweep,
        tolerance: args.tolerance,
    };
    match run(&spec) {
        Ok(table) => {
            log::info!("wrote {} rows to {}", table.rows.len(), spec.output_path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
