use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use dasmr_core::planner::{
    cem_plan_from, OpenLoopPolicy, Policy, PursuitPolicy, RandomPolicy, ZeroPolicy,
};
use dasmr_core::trajectory::{record_episode, Trajectory};
use dasmr_core::{Environment, MetricsReport};

use crate::args::{PolicyArg, RolloutArgs};

pub struct RolloutOutput {
    pub report: MetricsReport,
    pub files: Vec<PathBuf>,
}

pub fn episode_file_name(episode: usize) -> String {
    format!("episode_{episode:04}.csv")
}

pub fn run(args: &RolloutArgs) -> Result<RolloutOutput> {
    let out = execute(args)?;
    print!("{}", out.report.table(args.policy.name()));
    Ok(out)
}

/// Runs the episodes and writes `episode_NNNN.csv` plus `report.json`.
pub fn execute(args: &RolloutArgs) -> Result<RolloutOutput> {
    if args.episodes == 0 {
        bail!("--episodes must be at least 1");
    }
    let cfg = args.env.resolve()?;
    let cem = args.cem.resolve(&cfg);
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;

    let mut env = Environment::new(cfg)?;
    let mut random = RandomPolicy::new(cfg.seed);
    let mut records = Vec::with_capacity(args.episodes);
    let mut files = Vec::with_capacity(args.episodes);
    for episode in 0..args.episodes {
        env.reset(None);
        let trajectory: Trajectory = match args.policy {
            PolicyArg::Pursuit => {
                record_episode(&mut env, &mut PursuitPolicy::default(), episode, "pursuit")?
            }
            PolicyArg::Zero => record_episode(&mut env, &mut ZeroPolicy, episode, "zero")?,
            PolicyArg::Random => record_episode(&mut env, &mut random, episode, "random")?,
            PolicyArg::Cem => {
                let plan = cem_plan_from(&cfg, *env.state(), env.goal(), &cfg.reward_spec(), &cem)?;
                let mut policy = OpenLoopPolicy::new(plan.actions);
                record_episode(&mut env, &mut policy as &mut dyn Policy, episode, "cem")?
            }
        };
        records.push(trajectory.episode_record(cfg.d_th));
        let path = args.out.join(episode_file_name(episode));
        trajectory.save(&path)?;
        files.push(path);
    }
    let report = MetricsReport::from_records(&records)?;
    let report_path = args.out.join("report.json");
    std::fs::write(&report_path, report.to_json() + "\n")
        .with_context(|| format!("writing {}", report_path.display()))?;
    Ok(RolloutOutput { report, files })
}
