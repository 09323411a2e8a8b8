//! Deterministic kinematics, simulation and episodic environment for
//! double-Ackermann-steering mobile robots (DASMRs) running a symmetric
//! negative four-wheel-steering configuration.
//!
//! The crate is layered bottom-up:
//!
//! * [`kinematics`]: bicycle-model reduction, inner/outer wheel geometry and
//!   ICR-based chassis rates.
//! * [`simulator`]: actuator rate limiting and exact arc integration at a
//!   fixed control period.
//! * [`rewards`]: maneuver-aware reward fields over goal-relative
//!   displacement.
//! * [`environment`]: the goal-conditioned episodic MDP (reset / step).
//! * [`metrics`]: success rate, distance error and SPL aggregation plus a
//!   sliding training monitor.
//! * [`planner`]: policies, scripted maneuvers and a cross-entropy-method
//!   planner used as a training-free reachability oracle.
//! * [`config`] and [`trajectory`]: the TOML config schema and the
//!   replayable trajectory file format.

pub mod config;
pub mod environment;
pub mod error;
pub mod kinematics;
pub mod metrics;
pub mod planner;
pub mod rewards;
pub mod simulator;
pub mod trajectory;

pub use environment::{Action, EnvConfig, Environment, Observation, StepInfo, StepResult};
pub use error::{Error, Result};
pub use kinematics::{RobotParams, VirtualBicycleCommand, WheelState};
pub use metrics::{EpisodeRecord, MetricsReport, Outcome};
pub use rewards::{Displacement, RewardKind, RewardSpec};
pub use simulator::{Pose, SimState};

/// Control period used throughout: the environment runs at 40 Hz.
pub const DEFAULT_DT: f64 = 1.0 / 40.0;
