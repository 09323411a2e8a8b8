use anyhow::{Context, Result};
use dasmr_core::planner::{cem_plan, reward_ordering_probe, OpenLoopPolicy};
use dasmr_core::trajectory::{record_episode, Trajectory, TrajectoryHeader};
use dasmr_core::{Environment, RewardKind, RewardSpec};

use crate::args::PlanArgs;
use crate::Status;

pub fn run(args: &PlanArgs) -> Result<Status> {
    let cfg = args.env.resolve()?;
    let cem = args.cem.resolve(&cfg);
    let goal = (args.goal[0], args.goal[1]);
    let objective = cfg.reward_spec();
    let plan = cem_plan(&cfg, goal, &objective, &cem)?;

    let mut env = Environment::new(cfg)?;
    env.reset_with_goal(goal);
    let trajectory = if plan.actions.is_empty() {
        Trajectory {
            header: TrajectoryHeader::for_episode(&env, 0, "cem"),
            rows: Vec::new(),
        }
    } else {
        record_episode(
            &mut env,
            &mut OpenLoopPolicy::new(plan.actions.clone()),
            0,
            "cem",
        )?
    };
    trajectory
        .save(&args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;

    println!("goal            ({}, {})", goal.0, goal.1);
    println!("objective       {objective}");
    println!("reached         {}", plan.reached);
    println!("final_distance  {:.4}", plan.final_distance);
    println!("steps           {}", plan.actions.len());
    println!("cumulative      {:.4}", plan.cumulative_reward);
    let mut specs: Vec<RewardSpec> = args
        .probe
        .iter()
        .map(|&k| RewardSpec::new(RewardKind::from(k)).with_d_th(cfg.d_th))
        .collect();
    specs.dedup();
    for p in reward_ordering_probe(&trajectory.poses(), goal, &specs) {
        println!(
            "probe {:<20} cumulative {:>12.4}  away_loss {:>10.4}",
            p.spec.to_string(),
            p.cumulative,
            p.away_loss
        );
    }
    println!("trajectory      {}", args.out.display());
    Ok(if plan.reached {
        Status::Ok
    } else {
        Status::NotReached
    })
}
