//! Policies and a training-free planning oracle.
//!
//! [`cem_plan`] runs the cross-entropy method over open-loop action
//! sequences: each iteration samples a population from a diagonal Gaussian
//! over action knots spanning the horizon (each knot held for a fixed
//! number of steps), clamps the samples into the action box, rolls every
//! sample out in its own copy of the environment, and refits the Gaussian
//! to the elite fraction ranked by [`RolloutSummary::score`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::environment::{Action, EnvConfig, Environment, Observation};
use crate::error::{Error, Result};
use crate::kinematics::RobotParams;
use crate::rewards::{Displacement, RewardSpec};
use crate::simulator::{self, Pose, SimState};

/// Deterministic map from observations to normalized actions.
pub trait Policy {
    fn act(&mut self, observation: &Observation) -> Action;

    /// Called at the start of every episode.
    fn reset(&mut self) {}
}

/// Always outputs the zero action.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroPolicy;

impl Policy for ZeroPolicy {
    fn act(&mut self, _: &Observation) -> Action {
        Action::default()
    }
}

/// Uniform random actions from a seeded generator.
#[derive(Debug, Clone)]
pub struct RandomPolicy {
    rng: ChaCha8Rng,
}

impl RandomPolicy {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Policy for RandomPolicy {
    fn act(&mut self, _: &Observation) -> Action {
        Action::new(
            self.rng.random_range(-1.0..=1.0),
            self.rng.random_range(-1.0..=1.0),
        )
    }
}

/// Replays a fixed sequence, then outputs zeros.
#[derive(Debug, Clone)]
pub struct OpenLoopPolicy {
    actions: Vec<Action>,
    cursor: usize,
}

impl OpenLoopPolicy {
    pub fn new(actions: Vec<Action>) -> Self {
        Self { actions, cursor: 0 }
    }
}

impl Policy for OpenLoopPolicy {
    fn act(&mut self, _: &Observation) -> Action {
        let a = self.actions.get(self.cursor).copied().unwrap_or_default();
        self.cursor += 1;
        Action::new(a.a_omega, a.a_phi)
    }

    fn reset(&mut self) {
        self.cursor = 0;
    }
}

/// Greedy pursuit: drive forward toward goals ahead, reverse toward goals
/// well behind, steering proportionally to the bearing.
#[derive(Debug, Clone, Copy)]
pub struct PursuitPolicy {
    pub steer_gain: f64,
    /// Distance at which the speed command starts to drop, m.
    pub slow_radius: f64,
}

impl Default for PursuitPolicy {
    fn default() -> Self {
        Self {
            steer_gain: 2.5,
            slow_radius: 0.8,
        }
    }
}

impl Policy for PursuitPolicy {
    fn act(&mut self, obs: &Observation) -> Action {
        let disp = obs.displacement();
        let speed = (disp.d / self.slow_radius).clamp(0.3, 1.0);
        let behind = disp.dx < 0.0 && disp.dy.abs() < -disp.dx;
        if behind {
            // Reversing with positive steer swings the rear to the left.
            let bearing = disp.dy.atan2(-disp.dx);
            Action::new(-speed, self.steer_gain * bearing)
        } else {
            let bearing = disp.dy.atan2(disp.dx);
            Action::new(speed, self.steer_gain * bearing)
        }
    }
}

/// Heading changes of the three arcs of a K-turn: forward, reverse with
/// opposite steering, forward again. All three rotate the heading the same
/// way, so symmetric segments of pi/3 reverse the heading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreePointTurn {
    /// Nominal heading change of each arc, rad (>= 0).
    pub arcs: [f64; 3],
    /// Normalized steering of the first arc; its sign picks the turn side.
    pub steer: f64,
    /// Normalized spin magnitude.
    pub speed: f64,
}

impl Default for ThreePointTurn {
    fn default() -> Self {
        Self {
            arcs: [std::f64::consts::FRAC_PI_3; 3],
            steer: 1.0,
            speed: 1.0,
        }
    }
}

/// Action sequence for a K-turn. Each segment is held until the heading
/// has turned by its arc, simulated from rest so actuator ramps count.
pub fn scripted_three_point(
    params: &RobotParams,
    dt: f64,
    turn: ThreePointTurn,
) -> Result<Vec<Action>> {
    params.validate()?;
    let steer = turn.steer.clamp(-1.0, 1.0);
    let speed = turn.speed.clamp(0.0, 1.0);
    let side = if steer < 0.0 { -1.0 } else { 1.0 };
    let mut state = SimState::at_rest(Pose::default());
    let mut actions = Vec::new();
    for (k, arc) in turn.arcs.iter().enumerate() {
        if *arc <= 0.0 {
            continue;
        }
        if speed == 0.0 || steer == 0.0 {
            return Err(Error::Argument(
                "a turning segment needs nonzero speed and steer".into(),
            ));
        }
        let sign = if k == 1 { -1.0 } else { 1.0 };
        let action = Action::new(sign * speed, sign * steer);
        let mut turned = 0.0;
        while turned < *arc {
            let next = simulator::simulate_step(&state, action.to_command(params), params, dt)?;
            turned += side * simulator::wrap_angle(next.pose.theta - state.pose.theta);
            state = next;
            actions.push(action);
            if actions.len() > SEGMENT_STEP_CAP {
                return Err(Error::Argument(format!(
                    "segment {k} does not reach {arc} rad"
                )));
            }
        }
    }
    Ok(actions)
}

const SEGMENT_STEP_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CemConfig {
    pub horizon: usize,
    pub population: usize,
    pub elite_fraction: f64,
    pub iterations: usize,
    pub init_std: f64,
    pub seed: u64,
    /// Steps each sampled action is held for; the Gaussian lives over
    /// `ceil(horizon / hold_steps)` action knots. 1 samples every step.
    pub hold_steps: usize,
}

impl Default for CemConfig {
    fn default() -> Self {
        Self {
            horizon: 300,
            population: 128,
            elite_fraction: 0.1,
            iterations: 40,
            init_std: 0.5,
            seed: 9527,
            hold_steps: 10,
        }
    }
}

impl CemConfig {
    pub fn elite_count(&self) -> usize {
        (self.population as f64 * self.elite_fraction).round() as usize
    }

    pub fn validate(&self, env: &EnvConfig) -> Result<()> {
        if self.horizon == 0 || self.horizon as u64 > env.max_episode_steps {
            return Err(Error::Argument(format!(
                "horizon {} must be in 1..={} (episode step limit)",
                self.horizon, env.max_episode_steps
            )));
        }
        if !(self.elite_fraction > 0.0 && self.elite_fraction < 1.0) {
            return Err(Error::Argument(format!(
                "elite_fraction must be in (0, 1), got {}",
                self.elite_fraction
            )));
        }
        if (self.population as f64 * self.elite_fraction) < 2.0 {
            return Err(Error::Argument(format!(
                "population {} x elite_fraction {} leaves fewer than 2 elites",
                self.population, self.elite_fraction
            )));
        }
        if self.hold_steps == 0 {
            return Err(Error::Argument("hold_steps must be > 0".into()));
        }
        if self.iterations == 0 {
            return Err(Error::Argument("iterations must be > 0".into()));
        }
        if !(self.init_std.is_finite() && self.init_std > 0.0) {
            return Err(Error::Argument(format!(
                "init_std must be > 0, got {}",
                self.init_std
            )));
        }
        Ok(())
    }
}

/// Outcome of rolling one action sequence out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RolloutSummary {
    /// Sum of the objective over executed steps.
    pub cumulative_reward: f64,
    /// Ranking score: executed rewards plus the last reward held for the
    /// remaining horizon (the episode end is treated as absorbing).
    pub score: f64,
    pub steps: usize,
    pub reached: bool,
    pub final_distance: f64,
}

/// Rolls `actions` out from `start` with `objective` as the reward. Stops at
/// termination, truncation or the end of the sequence.
pub fn rollout_sequence(
    config: &EnvConfig,
    start: SimState,
    goal: (f64, f64),
    objective: &RewardSpec,
    actions: &[Action],
) -> Result<RolloutSummary> {
    let config = EnvConfig {
        reward: *objective,
        ..*config
    };
    let mut env = Environment::new(config)?;
    let obs = env.reset_to_state(start, goal);
    let horizon = actions.len();
    let mut cumulative = 0.0;
    let mut last_reward = config.reward_spec().evaluate(obs.displacement());
    let mut final_distance = obs.displacement().d;
    let mut steps = 0;
    let mut reached = false;
    for a in actions {
        let r = env.step(*a)?;
        steps += 1;
        cumulative += r.reward;
        last_reward = r.reward;
        final_distance = r.info.distance;
        if r.done() {
            reached = r.terminated;
            break;
        }
    }
    Ok(RolloutSummary {
        cumulative_reward: cumulative,
        score: cumulative + last_reward * (horizon - steps) as f64,
        steps,
        reached,
        final_distance,
    })
}

/// Result of [`cem_plan`].
#[derive(Debug, Clone, PartialEq)]
pub struct CemPlan {
    /// Best sequence, cut at the step where its episode ended.
    pub actions: Vec<Action>,
    pub reached: bool,
    pub final_distance: f64,
    pub cumulative_reward: f64,
    /// Best score found so far, after each iteration.
    pub best_score_history: Vec<f64>,
}

/// Plans from the configured reset pose, at rest.
pub fn cem_plan(
    env_config: &EnvConfig,
    goal: (f64, f64),
    objective: &RewardSpec,
    cem: &CemConfig,
) -> Result<CemPlan> {
    cem_plan_from(
        env_config,
        SimState::at_rest(env_config.reset_robot_pose),
        goal,
        objective,
        cem,
    )
}

/// Plans from an arbitrary simulator state.
pub fn cem_plan_from(
    env_config: &EnvConfig,
    start: SimState,
    goal: (f64, f64),
    objective: &RewardSpec,
    cem: &CemConfig,
) -> Result<CemPlan> {
    env_config.validate()?;
    objective.validate()?;
    cem.validate(env_config)?;

    let start_distance = start.pose.distance_to(goal.0, goal.1);
    if start_distance < env_config.d_th {
        return Ok(CemPlan {
            actions: Vec::new(),
            reached: true,
            final_distance: start_distance,
            cumulative_reward: 0.0,
            best_score_history: Vec::new(),
        });
    }

    let knots = cem.horizon.div_ceil(cem.hold_steps);
    let dims = knots * 2;
    let elites = cem.elite_count();
    let mut rng = ChaCha8Rng::seed_from_u64(cem.seed);
    let mut mean = vec![0.0; dims];
    let mut std = vec![cem.init_std; dims];
    let mut best: Option<(Vec<Action>, RolloutSummary)> = None;
    let mut history = Vec::with_capacity(cem.iterations);

    for _ in 0..cem.iterations {
        // Sample serially so the result does not depend on thread scheduling.
        let samples: Vec<Vec<f64>> = (0..cem.population)
            .map(|_| {
                (0..dims)
                    .map(|d| {
                        let z: f64 = rng.sample(StandardNormal);
                        (mean[d] + std[d] * z).clamp(-1.0, 1.0)
                    })
                    .collect()
            })
            .collect();

        let summaries: Vec<RolloutSummary> = samples
            .par_iter()
            .map(|knots| {
                let seq = expand_knots(knots, cem.hold_steps, cem.horizon);
                rollout_sequence(env_config, start, goal, objective, &seq)
            })
            .collect::<Result<_>>()?;

        let mut order: Vec<usize> = (0..samples.len()).collect();
        order.sort_by(|&a, &b| {
            summaries[b]
                .score
                .total_cmp(&summaries[a].score)
                .then(a.cmp(&b))
        });

        let top = order[0];
        if best
            .as_ref()
            .is_none_or(|(_, s)| summaries[top].score > s.score)
        {
            let seq = expand_knots(&samples[top], cem.hold_steps, cem.horizon);
            best = Some((seq, summaries[top]));
        }
        history.push(
            best.as_ref()
                .map(|(_, s)| s.score)
                .unwrap_or(f64::NEG_INFINITY),
        );

        for d in 0..dims {
            let m = order[..elites].iter().map(|&k| samples[k][d]).sum::<f64>() / elites as f64;
            let var = order[..elites]
                .iter()
                .map(|&k| (samples[k][d] - m).powi(2))
                .sum::<f64>()
                / elites as f64;
            mean[d] = m;
            std[d] = var.sqrt();
        }
    }

    let (mut actions, summary) = best.expect("at least one iteration ran");
    actions.truncate(summary.steps);
    Ok(CemPlan {
        actions,
        reached: summary.reached,
        final_distance: summary.final_distance,
        cumulative_reward: summary.cumulative_reward,
        best_score_history: history,
    })
}

/// Piecewise-constant action sequence from interleaved `(spin, steer)` knots.
fn expand_knots(knots: &[f64], hold_steps: usize, horizon: usize) -> Vec<Action> {
    (0..horizon)
        .map(|t| {
            let k = t / hold_steps;
            Action::new(knots[2 * k], knots[2 * k + 1])
        })
        .collect()
}

/// Cumulative reward of one spec along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeResult {
    pub spec: RewardSpec,
    /// Sum of the reward over every pose after the start.
    pub cumulative: f64,
    /// Sum of per-step reward drops on steps where the Euclidean distance
    /// to the goal grew.
    pub away_loss: f64,
}

/// Evaluates every spec along `poses` (the first pose is the start and is
/// not rewarded, matching the environment).
pub fn reward_ordering_probe(
    poses: &[Pose],
    goal: (f64, f64),
    specs: &[RewardSpec],
) -> Vec<ProbeResult> {
    let disps: Vec<Displacement> = poses
        .iter()
        .map(|p| Displacement::from_world(p.x, p.y, p.theta, goal))
        .collect();
    specs
        .iter()
        .map(|spec| {
            let rewards: Vec<f64> = disps.iter().map(|d| spec.evaluate(*d)).collect();
            let cumulative = rewards.iter().skip(1).sum();
            let away_loss = disps
                .windows(2)
                .zip(rewards.windows(2))
                .filter(|(d, _)| d[1].d > d[0].d)
                .map(|(_, r)| (r[0] - r[1]).max(0.0))
                .sum::<f64>()
                + 0.0;
            ProbeResult {
                spec: *spec,
                cumulative,
                away_loss,
            }
        })
        .collect()
}

/// Replays `actions` in a fresh environment toward `goal` and returns the
/// visited poses (start included) and whether the episode terminated.
pub fn replay_poses(
    config: &EnvConfig,
    goal: (f64, f64),
    actions: &[Action],
) -> Result<(Vec<Pose>, bool)> {
    let mut env = Environment::new(*config)?;
    env.reset_with_goal(goal);
    let mut poses = vec![env.state().pose];
    for a in actions {
        let r = env.step(*a)?;
        poses.push(env.state().pose);
        if r.done() {
            return Ok((poses, r.terminated));
        }
    }
    Ok((poses, false))
}
