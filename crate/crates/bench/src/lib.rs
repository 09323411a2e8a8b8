//! Shared inputs for the benchmarks.

use dasmr_core::{Action, RobotParams, VirtualBicycleCommand};

/// Smoothly varying commands spanning the full spin and steering range.
pub fn sweep_commands(n: usize, params: &RobotParams) -> Vec<VirtualBicycleCommand> {
    (0..n)
        .map(|k| {
            let t = k as f64 / n.max(1) as f64 * std::f64::consts::TAU;
            VirtualBicycleCommand::new(
                params.max_wheel_spin * t.sin(),
                params.max_steer_angle * (3.0 * t).cos(),
            )
        })
        .collect()
}

/// Normalized actions with the same shape as [`sweep_commands`].
pub fn sweep_actions(n: usize) -> Vec<Action> {
    (0..n)
        .map(|k| {
            let t = k as f64 / n.max(1) as f64 * std::f64::consts::TAU;
            Action::new(t.sin(), (3.0 * t).cos())
        })
        .collect()
}
