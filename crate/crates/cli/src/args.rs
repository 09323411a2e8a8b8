use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use dasmr_core::config::CONFIG_ENV_VAR;
use dasmr_core::planner::CemConfig;
use dasmr_core::{EnvConfig, RewardKind, RewardSpec};

#[derive(Debug, Parser)]
#[command(
    name = "dasmr",
    version,
    about = "Double-Ackermann robot simulator, reward fields and evaluation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run episodes under a policy, write trajectories and a metrics report.
    Rollout(RolloutArgs),
    /// Sample a reward over goal displacements; write a CSV grid and a PNG.
    Heatmap(HeatmapArgs),
    /// Plan an open-loop maneuver to one goal with the cross-entropy method.
    Plan(PlanArgs),
    /// Recompute metrics from a directory of trajectory files.
    Eval(EvalArgs),
    /// Print the effective configuration as TOML.
    Config(ConfigArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RewardArg {
    Hs,
    Es,
    Ch,
    Cl,
    Euclid,
    Sparse,
}

impl From<RewardArg> for RewardKind {
    fn from(r: RewardArg) -> Self {
        match r {
            RewardArg::Hs => RewardKind::Hs,
            RewardArg::Es => RewardKind::Es,
            RewardArg::Ch => RewardKind::Ch,
            RewardArg::Cl => RewardKind::Cl,
            RewardArg::Euclid => RewardKind::Euclid,
            RewardArg::Sparse => RewardKind::Sparse,
        }
    }
}

/// Environment options shared by every command that simulates.
/// Flags override the config file, which overrides built-in defaults.
#[derive(Debug, Clone, Args)]
pub struct EnvArgs {
    /// TOML config file.
    #[arg(long, env = CONFIG_ENV_VAR)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Success radius in meters.
    #[arg(long)]
    pub d_th: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<u64>,
    /// Reward dispatched by the environment.
    #[arg(long, value_enum)]
    pub reward: Option<RewardArg>,
    /// Reward weighting (defaults per reward: hs 2, es 4, cl 3).
    #[arg(long)]
    pub c: Option<f64>,
    /// Keep the robot where it stopped between episodes.
    #[arg(long)]
    pub continuous_goals: bool,
}

impl EnvArgs {
    pub fn resolve(&self) -> Result<EnvConfig> {
        let mut cfg = crate::load_config(self.config.as_deref())?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(d_th) = self.d_th {
            cfg.d_th = d_th;
        }
        if let Some(n) = self.max_steps {
            cfg.max_episode_steps = n;
        }
        if let Some(kind) = self.reward {
            cfg.reward = RewardSpec::new(kind.into());
        }
        if let Some(c) = self.c {
            cfg.reward.c = c;
        }
        if self.continuous_goals {
            cfg.continuous_goals = true;
        }
        cfg.reward = cfg.reward.with_d_th(cfg.d_th);
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    /// Greedy forward/reverse pursuit controller.
    Pursuit,
    /// Uniform random actions seeded from the environment seed.
    Random,
    /// Always zero.
    Zero,
    /// Per-goal cross-entropy plan, replayed open loop.
    Cem,
}

impl PolicyArg {
    pub fn name(self) -> &'static str {
        match self {
            PolicyArg::Pursuit => "pursuit",
            PolicyArg::Random => "random",
            PolicyArg::Zero => "zero",
            PolicyArg::Cem => "cem",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RolloutArgs {
    #[command(flatten)]
    pub env: EnvArgs,
    #[arg(long, value_enum, default_value = "pursuit")]
    pub policy: PolicyArg,
    #[arg(long, default_value_t = 20)]
    pub episodes: usize,
    /// Output directory for trajectories and report.json.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub cem: CemArgs,
}

#[derive(Debug, Clone, Args)]
pub struct HeatmapArgs {
    #[arg(long, value_enum)]
    pub reward: RewardArg,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long, default_value_t = 0.15)]
    pub d_th: f64,
    /// Half side of the sampled square, m.
    #[arg(long, default_value_t = 4.0)]
    pub extent: f64,
    /// Points per axis.
    #[arg(long, default_value_t = 101)]
    pub resolution: usize,
    /// Output directory; writes `<reward>.csv` and `<reward>.png`.
    #[arg(long)]
    pub out: PathBuf,
}

impl HeatmapArgs {
    pub fn spec(&self) -> RewardSpec {
        let kind: RewardKind = self.reward.into();
        RewardSpec::new(kind)
            .with_c(self.c.unwrap_or(kind.default_c()))
            .with_d_th(self.d_th)
    }
}

#[derive(Debug, Clone, Args)]
pub struct CemArgs {
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long, default_value_t = 128)]
    pub population: usize,
    #[arg(long, default_value_t = 0.1)]
    pub elite_fraction: f64,
    #[arg(long, default_value_t = 40)]
    pub iterations: usize,
    #[arg(long, default_value_t = 0.5)]
    pub init_std: f64,
    /// Planner seed; defaults to the environment seed.
    #[arg(long)]
    pub cem_seed: Option<u64>,
    #[arg(long, default_value_t = 10)]
    pub hold_steps: usize,
}

impl CemArgs {
    /// Planner config; the horizon defaults to min(300, step limit).
    pub fn resolve(&self, env: &EnvConfig) -> CemConfig {
        CemConfig {
            horizon: self
                .horizon
                .unwrap_or_else(|| 300.min(env.max_episode_steps as usize)),
            population: self.population,
            elite_fraction: self.elite_fraction,
            iterations: self.iterations,
            init_std: self.init_std,
            seed: self.cem_seed.unwrap_or(env.seed),
            hold_steps: self.hold_steps,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub env: EnvArgs,
    #[command(flatten)]
    pub cem: CemArgs,
    /// Goal position in the reset frame, m.
    #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_negative_numbers = true, required = true)]
    pub goal: Vec<f64>,
    /// Extra rewards to report cumulative values for (comma separated).
    #[arg(long, value_enum, value_delimiter = ',')]
    pub probe: Vec<RewardArg>,
    /// Trajectory file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Directory of trajectory files (`*.csv`).
    #[arg(long)]
    pub dir: PathBuf,
    /// Success radius used to re-judge every episode, m.
    #[arg(long, default_value_t = 0.15)]
    pub d_th: f64,
    /// Print JSON instead of the text table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    #[command(flatten)]
    pub env: EnvArgs,
}
