//! Double-Ackermann steering geometry.
//!
//! The robot is reduced to a bicycle model with virtual central wheels on
//! the longitudinal axis. Front and rear axles steer with equal magnitude
//! and opposite sign, which places the instantaneous center of rotation
//! (ICR) on the lateral axis through the chassis center.
//!
//! Frame conventions: x forward, y left, heading counter-clockwise. A
//! positive steering command turns left, a positive spin command drives
//! forward.
//!
//! `wheelbase_l` is the longitudinal offset of each axle from the chassis
//! center. With that reading the ICR sits at lateral offset
//! `wheelbase_l * cot(phi)` from the center line, and the inner/outer wheel
//! relations below are exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometric and actuation description of the robot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RobotParams {
    /// Longitudinal axle offset from the chassis center, in meters.
    pub wheelbase_l: f64,
    /// Track (lateral distance between left and right wheels), in meters.
    pub track_w: f64,
    pub wheel_radius: f64,
    /// Scale of the normalized spin action, rad/s.
    pub max_wheel_spin: f64,
    /// Scale of the normalized steering action, rad. Must stay below pi/2.
    pub max_steer_angle: f64,
    pub max_steer_rate: f64,
    pub max_wheel_spin_accel: f64,
}

impl Default for RobotParams {
    fn default() -> Self {
        Self {
            wheelbase_l: 0.25,
            track_w: 0.55,
            wheel_radius: 0.13,
            max_wheel_spin: 7.7,
            max_steer_angle: 0.436,
            max_steer_rate: 1.0,
            max_wheel_spin_accel: 5.0,
        }
    }
}

impl RobotParams {
    /// Checks every invariant: all fields finite and strictly positive,
    /// the steering limit below pi/2, and the ICR outside the track at full
    /// lock (otherwise the inner wheel would need more than pi/2 of steer).
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("wheelbase_l", self.wheelbase_l),
            ("track_w", self.track_w),
            ("wheel_radius", self.wheel_radius),
            ("max_wheel_spin", self.max_wheel_spin),
            ("max_steer_angle", self.max_steer_angle),
            ("max_steer_rate", self.max_steer_rate),
            ("max_wheel_spin_accel", self.max_wheel_spin_accel),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Config(format!(
                    "{name} must be finite and > 0, got {value}"
                )));
            }
        }
        if self.max_steer_angle >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::Config(format!(
                "max_steer_angle must be < pi/2, got {}",
                self.max_steer_angle
            )));
        }
        let (sin, cos) = self.max_steer_angle.sin_cos();
        if 2.0 * self.wheelbase_l * cos - self.track_w * sin <= 0.0 {
            return Err(Error::Config(format!(
                "max_steer_angle {} puts the ICR inside the track (wheelbase_l {}, track_w {})",
                self.max_steer_angle, self.wheelbase_l, self.track_w
            )));
        }
        Ok(())
    }

    /// Largest rim speed of the virtual central wheel, m/s.
    pub fn max_speed(&self) -> f64 {
        self.max_wheel_spin * self.wheel_radius
    }

    /// Turning radius of the chassis center at a given central steering angle.
    pub fn turning_radius(&self, phi_c: f64) -> f64 {
        self.wheelbase_l / phi_c.abs().tan()
    }
}

/// Command for the virtual central wheels of the bicycle model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct VirtualBicycleCommand {
    /// Central wheel spin, rad/s.
    pub omega_c: f64,
    /// Central steering angle, rad.
    pub phi_c: f64,
}

impl VirtualBicycleCommand {
    pub fn new(omega_c: f64, phi_c: f64) -> Self {
        Self { omega_c, phi_c }
    }

    /// Clamps both components to the absolute limits of `params`.
    pub fn clamped(self, params: &RobotParams) -> Self {
        Self {
            omega_c: self
                .omega_c
                .clamp(-params.max_wheel_spin, params.max_wheel_spin),
            phi_c: self
                .phi_c
                .clamp(-params.max_steer_angle, params.max_steer_angle),
        }
    }
}

/// Spin and steering of the left and right front wheels. The rear wheels
/// mirror the steering with opposite sign and share the spin.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WheelState {
    pub omega_l: f64,
    pub omega_r: f64,
    pub phi_l: f64,
    pub phi_r: f64,
}

/// Spin and steering of a single wheel.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WheelCommand {
    pub omega: f64,
    pub phi: f64,
}

/// Inner and outer wheel steering angles for a central steering angle.
///
/// Computed on `|phi_c|` and signed like `phi_c`, so the result is odd in
/// `phi_c` and `|phi_o| <= |phi_c| <= |phi_i|`.
pub fn inner_outer_steering(phi_c: f64, params: &RobotParams) -> Result<(f64, f64)> {
    params.validate()?;
    if phi_c == 0.0 {
        return Ok((0.0, 0.0));
    }
    if phi_c.abs() > params.max_steer_angle {
        return Err(Error::Domain(format!(
            "|phi_c| = {} exceeds max_steer_angle {}",
            phi_c.abs(),
            params.max_steer_angle
        )));
    }
    let two_l = 2.0 * params.wheelbase_l;
    let w = params.track_w;
    let (sin, cos) = phi_c.abs().sin_cos();
    let phi_i = (two_l * sin / (two_l * cos - w * sin)).atan();
    let phi_o = (two_l * sin / (two_l * cos + w * sin)).atan();
    Ok((phi_i.copysign(phi_c), phi_o.copysign(phi_c)))
}

/// Inner and outer wheel spin for a central spin and inner steering angle.
///
/// The ratios are the wheel-to-ICR distances over the central-wheel-to-ICR
/// distance. With `Y = L cot|phi_i|` the inner wheel sits at `sqrt(Y^2 + L^2)`,
/// the central wheel at `sqrt((Y + W/2)^2 + L^2)` and the outer wheel at
/// `sqrt((Y + W)^2 + L^2)`. Numerator and denominator are multiplied through
/// by `sin|phi_i|` so that `cot` never appears and tiny angles cannot
/// overflow; the ratio is unchanged.
pub fn inner_outer_spin(omega_c: f64, phi_i: f64, params: &RobotParams) -> Result<(f64, f64)> {
    params.validate()?;
    if phi_i.is_nan() || phi_i.abs() >= std::f64::consts::FRAC_PI_2 {
        return Err(Error::Domain(format!(
            "|phi_i| = {} must be < pi/2",
            phi_i.abs()
        )));
    }
    if phi_i == 0.0 {
        return Ok((omega_c, omega_c));
    }
    let l = params.wheelbase_l;
    let w = params.track_w;
    let (sin, cos) = phi_i.abs().sin_cos();
    // Scaled distances: Y*sin = L*cos, L*sin.
    let y = l * cos;
    let ls = l * sin;
    let inner = y.hypot(ls);
    let central = (y + 0.5 * w * sin).hypot(ls);
    let outer = (y + w * sin).hypot(ls);
    Ok((omega_c * inner / central, omega_c * outer / central))
}

/// Maps inner/outer wheel commands to left/right according to the turn
/// direction. For `phi_c >= 0` (left turn or straight) the left wheel is the
/// inner one; otherwise the roles swap. Steering carries the sign of `phi_c`.
pub fn assign_left_right(phi_c: f64, inner: WheelCommand, outer: WheelCommand) -> WheelState {
    let sign = if phi_c < 0.0 { -1.0 } else { 1.0 };
    let (left, right) = if phi_c >= 0.0 {
        (inner, outer)
    } else {
        (outer, inner)
    };
    WheelState {
        omega_l: left.omega,
        omega_r: right.omega,
        phi_l: left.phi.abs() * sign,
        phi_r: right.phi.abs() * sign,
    }
}

/// Full wheel state for a virtual command.
pub fn wheel_state(cmd: VirtualBicycleCommand, params: &RobotParams) -> Result<WheelState> {
    let (phi_i, phi_o) = inner_outer_steering(cmd.phi_c, params)?;
    let (omega_i, omega_o) = inner_outer_spin(cmd.omega_c, phi_i, params)?;
    Ok(assign_left_right(
        cmd.phi_c,
        WheelCommand {
            omega: omega_i,
            phi: phi_i,
        },
        WheelCommand {
            omega: omega_o,
            phi: phi_o,
        },
    ))
}

/// Body-frame forward speed (m/s) and yaw rate (rad/s) of the chassis center.
///
/// The center rotates about the ICR at `Y = L cot|phi_c|`; the central wheel
/// is at distance `sqrt(Y^2 + L^2) = L / sin|phi_c|` from it. Hence
/// `theta_dot = v_w sin(phi_c) / L` and `v_body = theta_dot * Y = v_w cos(phi_c)`,
/// both continuous through `phi_c = 0`. The center has no lateral velocity.
pub fn chassis_rates(cmd: VirtualBicycleCommand, params: &RobotParams) -> (f64, f64) {
    let v_w = cmd.omega_c * params.wheel_radius;
    if cmd.phi_c == 0.0 {
        return (v_w, 0.0);
    }
    let (sin, cos) = cmd.phi_c.sin_cos();
    (v_w * cos, v_w * sin / params.wheelbase_l)
}
