//! Discrete-time vehicle simulator: actuator rate limiting, kinematic
//! update of the wheels and exact arc integration of the chassis pose.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{self, RobotParams, VirtualBicycleCommand, WheelState};

/// Planar pose of the chassis center in the episode's reset frame.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    /// Heading, wrapped to (-pi, pi].
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    pub fn distance_to(&self, x: f64, y: f64) -> f64 {
        (x - self.x).hypot(y - self.y)
    }
}

/// Wraps an angle to (-pi, pi].
pub fn wrap_angle(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let wrapped = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if wrapped == -PI {
        PI
    } else {
        wrapped
    }
}

/// Complete simulator state observed by the environment.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimState {
    pub pose: Pose,
    /// Rate-limited virtual command currently applied.
    pub command: VirtualBicycleCommand,
    pub wheels: WheelState,
    pub phi_dot_l: f64,
    pub phi_dot_r: f64,
    /// Chassis velocity in the reset frame.
    pub v_x: f64,
    pub v_y: f64,
    pub theta_dot: f64,
    pub step_index: u64,
}

impl SimState {
    /// A robot at rest at `pose`.
    pub fn at_rest(pose: Pose) -> Self {
        Self {
            pose,
            ..Self::default()
        }
    }

    /// Body-frame forward speed of the center.
    pub fn v_longitudinal(&self) -> f64 {
        let (s, c) = self.pose.theta.sin_cos();
        self.v_x * c + self.v_y * s
    }

    /// Body-frame lateral speed of the center; zero for this platform.
    pub fn v_lateral(&self) -> f64 {
        let (s, c) = self.pose.theta.sin_cos();
        -self.v_x * s + self.v_y * c
    }
}

fn step_toward(current: f64, target: f64, max_delta: f64) -> f64 {
    current + (target - current).clamp(-max_delta, max_delta)
}

/// Moves the applied command toward `target` within the actuator rate limits.
pub fn apply_actuators(
    target: VirtualBicycleCommand,
    current: &SimState,
    dt: f64,
    params: &RobotParams,
) -> VirtualBicycleCommand {
    let target = target.clamped(params);
    let now = current.command;
    VirtualBicycleCommand {
        omega_c: step_toward(
            now.omega_c,
            target.omega_c,
            params.max_wheel_spin_accel * dt,
        ),
        phi_c: step_toward(now.phi_c, target.phi_c, params.max_steer_rate * dt),
    }
    .clamped(params)
}

/// Integrates constant body speed and yaw rate over `dt` along the exact arc.
pub fn step_pose(pose: Pose, v_body: f64, theta_dot: f64, dt: f64) -> Pose {
    let (s0, c0) = pose.theta.sin_cos();
    if theta_dot.abs() < 1e-9 {
        let ds = v_body * dt;
        return Pose {
            x: pose.x + ds * c0,
            y: pose.y + ds * s0,
            theta: pose.theta,
        };
    }
    let radius = v_body / theta_dot;
    let theta1 = pose.theta + theta_dot * dt;
    let (s1, c1) = theta1.sin_cos();
    Pose {
        x: pose.x + radius * (s1 - s0),
        y: pose.y - radius * (c1 - c0),
        theta: wrap_angle(theta1),
    }
}

/// One simulator transition: actuators, wheel kinematics, chassis rates and
/// pose integration. Pure and deterministic.
pub fn simulate_step(
    state: &SimState,
    target: VirtualBicycleCommand,
    params: &RobotParams,
    dt: f64,
) -> Result<SimState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Argument(format!("dt must be > 0, got {dt}")));
    }
    let command = apply_actuators(target, state, dt, params);
    let wheels = kinematics::wheel_state(command, params)?;
    let (v_body, theta_dot) = kinematics::chassis_rates(command, params);
    let pose = step_pose(state.pose, v_body, theta_dot, dt);
    let (s, c) = pose.theta.sin_cos();
    Ok(SimState {
        pose,
        command,
        wheels,
        phi_dot_l: (wheels.phi_l - state.wheels.phi_l) / dt,
        phi_dot_r: (wheels.phi_r - state.wheels.phi_r) / dt,
        v_x: v_body * c,
        v_y: v_body * s,
        theta_dot,
        step_index: state.step_index + 1,
    })
}
