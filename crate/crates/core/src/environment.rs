//! Goal-conditioned episodic environment.
//!
//! The robot starts at a configured pose in the reset frame, a goal is drawn
//! uniformly from a square goal region, and each step applies a normalized
//! `(spin, steer)` action at the control rate. An episode terminates when the
//! center comes within `d_th` of the goal (orientation is ignored) and is
//! truncated on the step limit or when the center leaves the workspace.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{self, RobotParams, VirtualBicycleCommand};
use crate::rewards::{Displacement, RewardSpec};
use crate::simulator::{self, Pose, SimState};

/// Environment parameters. The reward's threshold always follows `d_th`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvConfig {
    pub robot: RobotParams,
    /// Half side of the square workspace, m.
    pub workspace_half_extent: f64,
    /// Half side of the square goal region, m.
    pub goal_half_extent: f64,
    /// Success radius, m.
    pub d_th: f64,
    pub max_episode_steps: u64,
    pub dt: f64,
    pub reward: RewardSpec,
    pub seed: u64,
    pub reset_robot_pose: Pose,
    /// Keep the robot state across resets and only draw a new goal.
    pub continuous_goals: bool,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            robot: RobotParams::default(),
            workspace_half_extent: 4.0,
            goal_half_extent: 2.0,
            d_th: 0.15,
            max_episode_steps: 800,
            dt: crate::DEFAULT_DT,
            reward: RewardSpec::default(),
            seed: 9527,
            reset_robot_pose: Pose::default(),
            continuous_goals: false,
        }
    }
}

impl EnvConfig {
    /// Evaluation preset: test-time step limit and seed.
    pub fn evaluation(seed: u64, max_episode_steps: u64) -> Self {
        Self {
            seed,
            max_episode_steps,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.robot.validate()?;
        self.reward.validate()?;
        let positive = [
            ("workspace_half_extent", self.workspace_half_extent),
            ("goal_half_extent", self.goal_half_extent),
            ("d_th", self.d_th),
            ("dt", self.dt),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Config(format!(
                    "{name} must be finite and > 0, got {value}"
                )));
            }
        }
        if self.goal_half_extent > self.workspace_half_extent {
            return Err(Error::Config(format!(
                "goal_half_extent {} exceeds workspace_half_extent {}",
                self.goal_half_extent, self.workspace_half_extent
            )));
        }
        if self.max_episode_steps == 0 {
            return Err(Error::Config("max_episode_steps must be > 0".into()));
        }
        let p = self.reset_robot_pose;
        if !(p.x.is_finite() && p.y.is_finite() && p.theta.is_finite()) {
            return Err(Error::Config("reset_robot_pose must be finite".into()));
        }
        Ok(())
    }

    /// Reward actually dispatched: the configured kind and weighting with the
    /// environment's success radius.
    pub fn reward_spec(&self) -> RewardSpec {
        self.reward.with_d_th(self.d_th)
    }

    pub fn out_of_bounds(&self, pose: &Pose) -> bool {
        pose.x.abs() > self.workspace_half_extent || pose.y.abs() > self.workspace_half_extent
    }
}

/// Normalized action. Components are clamped to `[-1, 1]` on construction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub a_omega: f64,
    pub a_phi: f64,
}

impl Action {
    /// Clamps into `[-1, 1]^2`. NaN components are kept so that `step` can
    /// reject them.
    pub fn new(a_omega: f64, a_phi: f64) -> Self {
        Self {
            a_omega: a_omega.clamp(-1.0, 1.0),
            a_phi: a_phi.clamp(-1.0, 1.0),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.a_omega.is_finite() && self.a_phi.is_finite()
    }

    /// Physical command obtained by scaling with the actuation limits.
    pub fn to_command(self, params: &RobotParams) -> VirtualBicycleCommand {
        let a = Action::new(self.a_omega, self.a_phi);
        VirtualBicycleCommand::new(
            a.a_omega * params.max_wheel_spin,
            a.a_phi * params.max_steer_angle,
        )
    }
}

/// The 14-component observation, all quantities in the reset frame.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub x_c: f64,
    pub y_c: f64,
    pub x_d: f64,
    pub y_d: f64,
    pub theta_c: f64,
    pub omega_l: f64,
    pub omega_r: f64,
    pub phi_l: f64,
    pub phi_r: f64,
    pub phi_dot_l: f64,
    pub phi_dot_r: f64,
    pub v_x: f64,
    pub v_y: f64,
    pub theta_dot: f64,
}

impl Observation {
    pub const LEN: usize = 14;
    pub const NAMES: [&'static str; 14] = [
        "x_c",
        "y_c",
        "x_d",
        "y_d",
        "theta_c",
        "omega_l",
        "omega_r",
        "phi_l",
        "phi_r",
        "phi_dot_l",
        "phi_dot_r",
        "v_x",
        "v_y",
        "theta_dot",
    ];

    pub fn assemble(state: &SimState, goal: (f64, f64)) -> Self {
        Self {
            x_c: state.pose.x,
            y_c: state.pose.y,
            x_d: goal.0,
            y_d: goal.1,
            theta_c: state.pose.theta,
            omega_l: state.wheels.omega_l,
            omega_r: state.wheels.omega_r,
            phi_l: state.wheels.phi_l,
            phi_r: state.wheels.phi_r,
            phi_dot_l: state.phi_dot_l,
            phi_dot_r: state.phi_dot_r,
            v_x: state.v_x,
            v_y: state.v_y,
            theta_dot: state.theta_dot,
        }
    }

    pub fn to_array(&self) -> [f64; 14] {
        [
            self.x_c,
            self.y_c,
            self.x_d,
            self.y_d,
            self.theta_c,
            self.omega_l,
            self.omega_r,
            self.phi_l,
            self.phi_r,
            self.phi_dot_l,
            self.phi_dot_r,
            self.v_x,
            self.v_y,
            self.theta_dot,
        ]
    }

    /// Displacement to the goal in the current body frame.
    pub fn displacement(&self) -> Displacement {
        Displacement::from_world(self.x_c, self.y_c, self.theta_c, (self.x_d, self.y_d))
    }
}

/// Per-component box bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSpace<const N: usize> {
    pub low: [f64; N],
    pub high: [f64; N],
}

impl<const N: usize> BoxSpace<N> {
    pub fn contains(&self, x: &[f64; N]) -> bool {
        x.iter()
            .zip(self.low.iter().zip(&self.high))
            .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }
}

pub fn action_space() -> BoxSpace<2> {
    BoxSpace {
        low: [-1.0, -1.0],
        high: [1.0, 1.0],
    }
}

/// Physical bounds of every observation component under `config`.
pub fn observation_space(config: &EnvConfig) -> Result<BoxSpace<14>> {
    config.validate()?;
    let p = &config.robot;
    let ws = config.workspace_half_extent;
    let g = config.goal_half_extent;
    let (phi_i_max, _) = kinematics::inner_outer_steering(p.max_steer_angle, p)?;
    let (_, omega_o_max) = kinematics::inner_outer_spin(p.max_wheel_spin, phi_i_max, p)?;
    // Largest per-step change of the inner wheel angle at the steering rate limit.
    let dphi = p.max_steer_rate * config.dt;
    let mut phi_dot_max = p.max_steer_rate;
    let samples = 1000;
    for k in 0..=samples {
        let hi = p.max_steer_angle * k as f64 / samples as f64;
        let lo = (hi - dphi).max(-p.max_steer_angle);
        let (a, _) = kinematics::inner_outer_steering(hi, p)?;
        let (b, b_o) = kinematics::inner_outer_steering(lo, p)?;
        // Crossing zero hands the wheel from the outer to the inner role.
        let prev = if lo < 0.0 { b_o } else { b };
        phi_dot_max = phi_dot_max.max((a - prev).abs() / config.dt);
    }
    let phi_dot_max = phi_dot_max * (1.0 + 1e-9);
    let v_max = p.max_speed();
    let yaw_max = v_max * p.max_steer_angle.sin() / p.wheelbase_l;
    let high = [
        ws,
        ws,
        g,
        g,
        PI,
        omega_o_max,
        omega_o_max,
        phi_i_max,
        phi_i_max,
        phi_dot_max,
        phi_dot_max,
        v_max,
        v_max,
        yaw_max,
    ];
    Ok(BoxSpace {
        low: high.map(|h| -h),
        high,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    /// Distance from the center to the goal after the step, m.
    pub distance: f64,
    /// 1-based index of this step within the episode.
    pub step: u64,
    pub out_of_bounds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
    pub info: StepInfo,
}

impl StepResult {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Fresh,
    Running,
    Done,
}

/// A single environment instance.
#[derive(Debug, Clone)]
pub struct Environment {
    config: EnvConfig,
    rng: ChaCha8Rng,
    state: SimState,
    goal: (f64, f64),
    episode_start: SimState,
    steps: u64,
    phase: Phase,
}

impl Environment {
    pub fn new(config: EnvConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            state: SimState::at_rest(config.reset_robot_pose),
            episode_start: SimState::at_rest(config.reset_robot_pose),
            config,
            goal: (0.0, 0.0),
            steps: 0,
            phase: Phase::Fresh,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn goal(&self) -> (f64, f64) {
        self.goal
    }

    /// Simulator state at the start of the current episode.
    pub fn episode_start(&self) -> &SimState {
        &self.episode_start
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn observation(&self) -> Observation {
        Observation::assemble(&self.state, self.goal)
    }

    pub fn action_space(&self) -> BoxSpace<2> {
        action_space()
    }

    pub fn observation_space(&self) -> BoxSpace<14> {
        observation_space(&self.config).expect("config validated at construction")
    }

    fn sample_goal(&mut self) -> (f64, f64) {
        let g = self.config.goal_half_extent;
        let x = self.rng.random_range(-g..g);
        let y = self.rng.random_range(-g..g);
        (x, y)
    }

    /// Starts a new episode with a freshly sampled goal. `seed` reseeds the
    /// goal generator first.
    pub fn reset(&mut self, seed: Option<u64>) -> (Observation, (f64, f64)) {
        if let Some(seed) = seed {
            self.rng = ChaCha8Rng::seed_from_u64(seed);
        }
        let goal = self.sample_goal();
        self.begin_episode(goal);
        (self.observation(), goal)
    }

    /// Starts a new episode toward a given goal without touching the RNG.
    pub fn reset_with_goal(&mut self, goal: (f64, f64)) -> Observation {
        self.begin_episode(goal);
        self.observation()
    }

    /// Starts an episode from an explicit simulator state.
    pub fn reset_to_state(&mut self, state: SimState, goal: (f64, f64)) -> Observation {
        self.state = state;
        self.goal = goal;
        self.episode_start = state;
        self.steps = 0;
        self.phase = Phase::Running;
        self.observation()
    }

    fn begin_episode(&mut self, goal: (f64, f64)) {
        let keep = self.config.continuous_goals && self.phase != Phase::Fresh;
        let state = if keep {
            self.state
        } else {
            SimState::at_rest(self.config.reset_robot_pose)
        };
        self.reset_to_state(state, goal);
    }

    pub fn step(&mut self, action: Action) -> Result<StepResult> {
        match self.phase {
            Phase::Fresh => return Err(Error::Usage("step called before reset".into())),
            Phase::Done => {
                return Err(Error::Usage(
                    "step called after episode end without reset".into(),
                ))
            }
            Phase::Running => {}
        }
        if !action.is_finite() {
            return Err(Error::Argument(format!("non-finite action {action:?}")));
        }
        let target = action.to_command(&self.config.robot);
        self.state =
            simulator::simulate_step(&self.state, target, &self.config.robot, self.config.dt)?;
        self.steps += 1;

        let observation = self.observation();
        let disp = observation.displacement();
        let reward = self.config.reward_spec().evaluate(disp);
        let out_of_bounds = self.config.out_of_bounds(&self.state.pose);
        let terminated = disp.d < self.config.d_th;
        let truncated =
            !terminated && (self.steps >= self.config.max_episode_steps || out_of_bounds);
        if terminated || truncated {
            self.phase = Phase::Done;
        }
        Ok(StepResult {
            observation,
            reward,
            terminated,
            truncated,
            info: StepInfo {
                distance: disp.d,
                step: self.steps,
                out_of_bounds,
            },
        })
    }
}
