//! Reward fields over goal-relative displacement.
//!
//! All rewards take the displacement from the robot center to the goal,
//! expressed in the robot body frame (`dx` forward, `dy` left).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Body-frame displacement from the robot center to the goal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Displacement {
    pub dx: f64,
    pub dy: f64,
    pub d: f64,
}

impl Displacement {
    pub fn new(dx: f64, dy: f64) -> Self {
        Self {
            dx,
            dy,
            d: dx.hypot(dy),
        }
    }

    /// Displacement to `goal` seen from a robot at `(x, y)` with heading `theta`.
    pub fn from_world(x: f64, y: f64, theta: f64, goal: (f64, f64)) -> Self {
        let (s, c) = theta.sin_cos();
        let ex = goal.0 - x;
        let ey = goal.1 - y;
        Self::new(c * ex + s * ey, -s * ex + c * ey)
    }
}

/// Hourglass reward: an ellipse inside the `|dy| <= |dx|` cone, with the
/// lateral term enlarged by the excess `|dy| - |dx|` outside it.
pub fn reward_hs(disp: Displacement, c: f64) -> f64 {
    let Displacement { dx, dy, .. } = disp;
    let excess = (dy.abs() - dx.abs()).max(0.0);
    let lateral = dy + excess.copysign(dy);
    -(dx * dx + (c * lateral) * (c * lateral)).sqrt()
}

/// Elliptic reward: Euclidean distance with the lateral error scaled by `c`.
pub fn reward_es(disp: Displacement, c: f64) -> f64 {
    let Displacement { dx, dy, .. } = disp;
    -(dx * dx + (c * dy) * (c * dy)).sqrt()
}

/// Chebyshev reward.
pub fn reward_ch(disp: Displacement) -> f64 {
    -disp.dx.abs().max(disp.dy.abs())
}

/// Clover reward. Only the one-sided condition `dy > d_th` switches to the
/// bearing-weighted branch; `dx == 0` takes the limit `atan = pi/2`.
pub fn reward_cl(disp: Displacement, c: f64, d_th: f64) -> f64 {
    let Displacement { dx, dy, d } = disp;
    if dy > d_th {
        let bearing = if dx == 0.0 {
            std::f64::consts::FRAC_PI_2
        } else {
            (dy / dx).atan()
        };
        bearing * c * (d_th - d).exp()
    } else {
        -d
    }
}

pub fn reward_euclid(disp: Displacement) -> f64 {
    -disp.d
}

/// 0 inside the success radius, -1 elsewhere.
pub fn reward_sparse(disp: Displacement, d_th: f64) -> f64 {
    if disp.d < d_th {
        0.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardKind {
    Hs,
    Es,
    Ch,
    Cl,
    Euclid,
    Sparse,
}

impl RewardKind {
    pub const ALL: [RewardKind; 6] = [
        RewardKind::Hs,
        RewardKind::Es,
        RewardKind::Ch,
        RewardKind::Cl,
        RewardKind::Euclid,
        RewardKind::Sparse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RewardKind::Hs => "hs",
            RewardKind::Es => "es",
            RewardKind::Ch => "ch",
            RewardKind::Cl => "cl",
            RewardKind::Euclid => "euclid",
            RewardKind::Sparse => "sparse",
        }
    }

    /// Weighting used in the reference reward-shape plots.
    pub fn default_c(self) -> f64 {
        match self {
            RewardKind::Hs => 2.0,
            RewardKind::Es => 4.0,
            RewardKind::Cl => 3.0,
            _ => 1.0,
        }
    }
}

impl fmt::Display for RewardKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RewardKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RewardKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::Argument(format!(
                    "unknown reward '{s}' (expected one of hs, es, ch, cl, euclid, sparse)"
                ))
            })
    }
}

/// A reward function together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardSpec {
    pub kind: RewardKind,
    pub c: f64,
    pub d_th: f64,
}

impl Default for RewardSpec {
    fn default() -> Self {
        Self::new(RewardKind::Hs)
    }
}

impl RewardSpec {
    /// `kind` with its default weighting and a 15 cm threshold.
    pub fn new(kind: RewardKind) -> Self {
        Self {
            kind,
            c: kind.default_c(),
            d_th: 0.15,
        }
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn with_d_th(mut self, d_th: f64) -> Self {
        self.d_th = d_th;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::Config(format!(
                "reward c must be > 0, got {}",
                self.c
            )));
        }
        if !(self.d_th.is_finite() && self.d_th > 0.0) {
            return Err(Error::Config(format!(
                "reward d_th must be > 0, got {}",
                self.d_th
            )));
        }
        Ok(())
    }

    pub fn evaluate(&self, disp: Displacement) -> f64 {
        match self.kind {
            RewardKind::Hs => reward_hs(disp, self.c),
            RewardKind::Es => reward_es(disp, self.c),
            RewardKind::Ch => reward_ch(disp),
            RewardKind::Cl => reward_cl(disp, self.c, self.d_th),
            RewardKind::Euclid => reward_euclid(disp),
            RewardKind::Sparse => reward_sparse(disp, self.d_th),
        }
    }
}

impl fmt::Display for RewardSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            RewardKind::Hs | RewardKind::Es => write!(f, "{}(c={})", self.kind, self.c),
            RewardKind::Cl => write!(f, "cl(c={}, d_th={})", self.c, self.d_th),
            RewardKind::Sparse => write!(f, "sparse(d_th={})", self.d_th),
            _ => write!(f, "{}", self.kind),
        }
    }
}

/// Axis-aligned sampling grid of goal displacements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    /// Square grid `[-extent, extent]^2` with `resolution` points per axis.
    pub fn square(extent: f64, resolution: usize) -> Self {
        Self {
            x_range: (-extent, extent),
            y_range: (-extent, extent),
            nx: resolution,
            ny: resolution,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::Argument(format!(
                "grid needs at least 2 points per axis, got {}x{}",
                self.nx, self.ny
            )));
        }
        for (lo, hi) in [self.x_range, self.y_range] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Argument(format!("invalid grid range [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    pub fn x(&self, i: usize) -> f64 {
        lerp(self.x_range, i, self.nx)
    }

    pub fn y(&self, j: usize) -> f64 {
        lerp(self.y_range, j, self.ny)
    }
}

fn lerp((lo, hi): (f64, f64), i: usize, n: usize) -> f64 {
    // Endpoints exact; symmetric ranges give exactly mirrored coordinates.
    let span = (n - 1) as f64;
    if 2 * i + 1 == n {
        return 0.5 * (lo + hi);
    }
    if 2 * i < n {
        lo + (hi - lo) * (i as f64 / span)
    } else {
        hi - (hi - lo) * ((n - 1 - i) as f64 / span)
    }
}

/// Reward sampled on a grid, row-major with x varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl RewardField {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nx + i]
    }
}

/// Evaluates `spec` over goal displacements with the robot at the origin
/// facing +x.
pub fn reward_field(spec: &RewardSpec, grid: Grid) -> Result<RewardField> {
    spec.validate()?;
    grid.validate()?;
    let mut values = Vec::with_capacity(grid.nx * grid.ny);
    for j in 0..grid.ny {
        let dy = grid.y(j);
        for i in 0..grid.nx {
            values.push(spec.evaluate(Displacement::new(grid.x(i), dy)));
        }
    }
    Ok(RewardField { grid, values })
}
