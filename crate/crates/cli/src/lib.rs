//! Command implementations behind the `dasmr` binary.

pub mod args;
pub mod eval;
pub mod heatmap;
pub mod plan;
pub mod rollout;

use std::path::Path;

use anyhow::{Context, Result};
use dasmr_core::config::load_env_config;
use dasmr_core::EnvConfig;

pub use args::{Cli, Command};

/// Exit status of a finished command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// The planner ran fine but did not reach the goal.
    NotReached,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::NotReached => 3,
        }
    }
}

pub fn run(cli: Cli) -> Result<Status> {
    match cli.command {
        Command::Rollout(a) => rollout::run(&a).map(|_| Status::Ok),
        Command::Heatmap(a) => heatmap::run(&a).map(|_| Status::Ok),
        Command::Plan(a) => plan::run(&a),
        Command::Eval(a) => eval::run(&a).map(|_| Status::Ok),
        Command::Config(a) => {
            let cfg = a.env.resolve()?;
            print!(
                "{}",
                dasmr_core::config::ConfigFile::from_env_config(&cfg).to_toml()
            );
            Ok(Status::Ok)
        }
    }
}

pub(crate) fn load_config(path: Option<&Path>) -> Result<EnvConfig> {
    load_env_config(path).with_context(|| match path {
        Some(p) => format!("loading config {}", p.display()),
        None => "building default config".to_string(),
    })
}
