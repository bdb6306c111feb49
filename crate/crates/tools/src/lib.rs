//! File formats and the command-line driver around `immigration-core`.
//!
//! Commands read one JSON config ([`config::ExperimentConfig`]), write CSV
//! matrices and JSON reports into an output directory, print a one-line
//! JSON summary to stdout, and exit with 0 (pass), 1 (usage or config
//! error), 2 (statistical rejection) or 3 (inconclusive or hypothesis
//! warning).

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod sampler;

use std::path::{Path, PathBuf};

pub use commands::Summary;
pub use config::ExperimentConfig;
pub use error::{CliError, Exit};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Stationary { dump_window: bool },
    Converge,
    Dri,
    PointProcess,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Stationary { .. } => "stationary",
            Command::Converge => "converge",
            Command::Dri => "dri",
            Command::PointProcess => "pointprocess",
        }
    }
}

/// Output directory: the flag if given, else `output_dir` from the config
/// (relative to the config file), else `out/` next to the config file.
pub fn resolve_output_dir(config_path: &Path, config: &ExperimentConfig, flag: Option<&Path>) -> PathBuf {
    if let Some(dir) = flag {
        return dir.to_path_buf();
    }
    let base = config_path.parent().unwrap_or(Path::new("."));
    match &config.output_dir {
        Some(d) if d.is_absolute() => d.clone(),
        Some(d) => base.join(d),
        None => base.join("out"),
    }
}

/// Load the config, run the command, and return the summary line.
pub fn run(command: Command, config_path: &Path, out_flag: Option<&Path>) -> Summary {
    let mut outputs = Vec::new();
    let result = (|| -> Result<commands::Outcome, CliError> {
        let config = ExperimentConfig::load(config_path)?;
        let dir = resolve_output_dir(config_path, &config, out_flag);
        let mut out = output::OutputDir::create(&dir)?;
        let outcome = match command {
            Command::Simulate => commands::simulate(&config, &mut out),
            Command::Stationary { dump_window } => commands::stationary(&config, &mut out, dump_window),
            Command::Converge => commands::converge(&config, &mut out),
            Command::Dri => commands::dri(&config, &mut out),
            Command::PointProcess => commands::pointprocess(&config, &mut out),
        };
        outputs = out.written().to_vec();
        outcome
    })();
    let (exit, message) = match result {
        Ok(o) => (o.exit, o.message),
        Err(e) => (e.exit(), e.to_string()),
    };
    Summary {
        command: command.name(),
        status: commands::status_name(exit),
        exit_code: exit.code(),
        outputs,
        message,
    }
}
