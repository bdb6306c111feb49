use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use immigration_tools::{run, Command, Exit};

/// Simulate random processes with immigration and test their convergence
/// to stationarity.
#[derive(Parser)]
#[command(name = "immigration", version)]
struct Cli {
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment config (JSON).
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Transient fdd matrices Y(t + u), one per t.
    Simulate(Common),
    /// Stationary fdd matrix Y*(u).
    Stationary {
        #[command(flatten)]
        common: Common,
        /// Also write the stationary window of replicate 0 as `index,point`.
        #[arg(long)]
        dump_window: bool,
    },
    /// Compare transient and stationary samples at each t.
    Converge(Common),
    /// Integrability criteria of the kernel.
    Dri(Common),
    /// Checks of the stationary renewal point process.
    Pointprocess(Common),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { Exit::Usage } else { Exit::Pass };
            return ExitCode::from(code.code());
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();
    let (command, common) = match cli.command {
        Cmd::Simulate(c) => (Command::Simulate, c),
        Cmd::Stationary { common, dump_window } => (Command::Stationary { dump_window }, common),
        Cmd::Converge(c) => (Command::Converge, c),
        Cmd::Dri(c) => (Command::Dri, c),
        Cmd::Pointprocess(c) => (Command::PointProcess, c),
    };
    let summary = run(command, &common.config, common.out.as_deref());
    if summary.exit_code != 0 {
        log::warn!("{}: {}", summary.status, summary.message);
    }
    let line = serde_json::to_string(&summary).expect("summary serializes");
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "{line}");
    ExitCode::from(summary.exit_code)
}
