//! Independent reference computations shared by the integration tests and
//! the acceptance suite. Nothing here calls into the library's formulas.
#![allow(dead_code)]

use dasmr_core::kinematics::{chassis_rates, wheel_state};
use dasmr_core::{RobotParams, VirtualBicycleCommand};

/// Worst relative mismatch between the library and a direct ICR
/// construction for one command.
///
/// Wheels sit at `(+-L, +-W/2)`, the ICR at `(0, sign(phi_c) L cot|phi_c|)`.
/// For every wheel the expected steering angle makes its heading
/// perpendicular to the radius from the ICR, and its spin follows from one
/// common yaw rate shared with the chassis center.
pub fn icr_mismatch(params: &RobotParams, cmd: VirtualBicycleCommand) -> f64 {
    let l = params.wheelbase_l;
    let w = params.track_w;
    let r = params.wheel_radius;
    let ws = wheel_state(cmd, params).expect("command within limits");
    let (v_body, theta_dot) = chassis_rates(cmd, params);

    let icr_y = cmd.phi_c.signum() * l / cmd.phi_c.abs().tan();
    let central_dist = (l * l + icr_y * icr_y).sqrt();
    let yaw = cmd.omega_c * r / central_dist * cmd.phi_c.signum();

    // (position, steering, spin) for FL, FR, RL, RR.
    let wheels = [
        ((l, 0.5 * w), ws.phi_l, ws.omega_l),
        ((l, -0.5 * w), ws.phi_r, ws.omega_r),
        ((-l, 0.5 * w), -ws.phi_l, ws.omega_l),
        ((-l, -0.5 * w), -ws.phi_r, ws.omega_r),
    ];
    let mut worst: f64 = 0.0;
    for ((px, py), phi, omega) in wheels {
        let rx = px;
        let ry = py - icr_y;
        let dist = (rx * rx + ry * ry).sqrt();
        // Heading perpendicular to the radius, pointing forward for px > 0.
        let expected_phi = (rx / -ry).atan();
        worst = worst.max(rel(phi, expected_phi));
        let (s, c) = phi.sin_cos();
        worst = worst.max((c * rx + s * ry).abs() / dist);
        let expected_omega = cmd.omega_c * dist / central_dist;
        worst = worst.max(rel(omega, expected_omega));
        // Rim speed over distance is the same signed yaw rate everywhere.
        let wheel_yaw = omega * r / dist * cmd.phi_c.signum();
        worst = worst.max(rel(wheel_yaw, yaw));
    }
    worst = worst.max(rel(theta_dot, yaw));
    worst.max(rel(v_body, yaw * icr_y))
}

pub fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < 1e-300 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Hourglass reward with the "+-" taken as the sign of dy.
pub fn reference_hs(dx: f64, dy: f64, c: f64) -> f64 {
    let extra = f64::max(0.0, dy.abs() - dx.abs());
    let lateral = if dy >= 0.0 { dy + extra } else { dy - extra };
    -(dx.powi(2) + (c * lateral).powi(2)).sqrt()
}

pub fn reference_es(dx: f64, dy: f64, c: f64) -> f64 {
    -(dx.powi(2) + (c * dy).powi(2)).sqrt()
}

pub fn reference_ch(dx: f64, dy: f64) -> f64 {
    -f64::max(dx.abs(), dy.abs())
}

pub fn reference_cl(dx: f64, dy: f64, c: f64, d_th: f64) -> f64 {
    let d = (dx.powi(2) + dy.powi(2)).sqrt();
    if dy > d_th {
        let angle = if dx == 0.0 {
            std::f64::consts::FRAC_PI_2
        } else {
            (dy / dx).atan()
        };
        angle * c * (d_th - d).exp()
    } else {
        -d
    }
}

pub fn reference_euclid(dx: f64, dy: f64) -> f64 {
    -(dx.powi(2) + dy.powi(2)).sqrt()
}

/// Least-squares circle through `points`: returns `(cx, cy, radius, max
/// absolute radial residual)`.
pub fn fit_circle(points: &[(f64, f64)]) -> (f64, f64, f64, f64) {
    let n = points.len() as f64;
    let (mx, my) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    // Centered algebraic fit: u^2 + v^2 = 2 a u + 2 b v + k.
    let mut m = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for (x, y) in points {
        let (u, v) = (x - mx, y - my);
        let row = [2.0 * u, 2.0 * v, 1.0];
        let z = u * u + v * v;
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += row[i] * row[j];
            }
            rhs[i] += row[i] * z;
        }
    }
    let [a, b, k] = solve3(m, rhs);
    let radius = (k + a * a + b * b).sqrt();
    let (cx, cy) = (a + mx, b + my);
    let worst = points
        .iter()
        .map(|(x, y)| ((x - cx).hypot(y - cy) - radius).abs())
        .fold(0.0, f64::max);
    (cx, cy, radius, worst)
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        b.swap(col, pivot);
        let pivot_row = m[col];
        for row in col + 1..3 {
            let f = m[row][col] / pivot_row[col];
            for (dst, src) in m[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *dst -= f * src;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| m[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / m[row][row];
    }
    x
}
