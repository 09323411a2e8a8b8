//! TOML configuration file.
//!
//! Every key is optional; missing keys keep the built-in defaults. Unknown
//! keys are rejected with the offending name in the message.
//!
//! ```toml
//! seed = 10
//! workspace_half_extent = 4.0
//! goal_half_extent = 2.0
//! d_th = 0.15
//! max_episode_steps = 300
//! dt = 0.025
//! continuous_goals = false
//!
//! [reset_pose]
//! x = 0.0
//! y = 0.0
//! theta = 0.0
//!
//! [reward]
//! kind = "hs"      # hs | es | ch | cl | euclid | sparse
//! c = 2.0          # defaults: hs 2, es 4, cl 3
//!
//! [robot]
//! wheelbase_l = 0.25
//! track_w = 0.55
//! wheel_radius = 0.13
//! max_wheel_spin = 7.7
//! max_steer_angle = 0.436
//! max_steer_rate = 1.0
//! max_wheel_spin_accel = 5.0
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::environment::EnvConfig;
use crate::error::{Error, Result};
use crate::kinematics::RobotParams;
use crate::rewards::{RewardKind, RewardSpec};
use crate::simulator::Pose;

/// Environment variable consulted for the config path when no flag is given.
pub const CONFIG_ENV_VAR: &str = "DASMR_CONFIG";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub workspace_half_extent: Option<f64>,
    pub goal_half_extent: Option<f64>,
    pub d_th: Option<f64>,
    pub max_episode_steps: Option<u64>,
    pub dt: Option<f64>,
    pub continuous_goals: Option<bool>,
    pub reset_pose: Option<Pose>,
    pub reward: Option<RewardSection>,
    pub robot: Option<RobotParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardSection {
    pub kind: RewardKind,
    pub c: Option<f64>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Overlays the file onto `base`.
    pub fn apply(&self, base: EnvConfig) -> Result<EnvConfig> {
        let mut cfg = base;
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.workspace_half_extent {
            cfg.workspace_half_extent = v;
        }
        if let Some(v) = self.goal_half_extent {
            cfg.goal_half_extent = v;
        }
        if let Some(v) = self.d_th {
            cfg.d_th = v;
        }
        if let Some(v) = self.max_episode_steps {
            cfg.max_episode_steps = v;
        }
        if let Some(v) = self.dt {
            cfg.dt = v;
        }
        if let Some(v) = self.continuous_goals {
            cfg.continuous_goals = v;
        }
        if let Some(v) = self.reset_pose {
            cfg.reset_robot_pose = Pose::new(v.x, v.y, v.theta);
        }
        if let Some(r) = &self.reward {
            cfg.reward = RewardSpec::new(r.kind).with_c(r.c.unwrap_or(r.kind.default_c()));
        }
        if let Some(robot) = self.robot {
            cfg.robot = robot;
        }
        cfg.reward = cfg.reward.with_d_th(cfg.d_th);
        cfg.validate()?;
        Ok(cfg)
    }

    /// The file that reproduces `cfg` exactly.
    pub fn from_env_config(cfg: &EnvConfig) -> Self {
        Self {
            seed: Some(cfg.seed),
            workspace_half_extent: Some(cfg.workspace_half_extent),
            goal_half_extent: Some(cfg.goal_half_extent),
            d_th: Some(cfg.d_th),
            max_episode_steps: Some(cfg.max_episode_steps),
            dt: Some(cfg.dt),
            continuous_goals: Some(cfg.continuous_goals),
            reset_pose: Some(cfg.reset_robot_pose),
            reward: Some(RewardSection {
                kind: cfg.reward.kind,
                c: Some(cfg.reward.c),
            }),
            robot: Some(cfg.robot),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Loads `path` (if any) over the built-in defaults.
pub fn load_env_config(path: Option<&Path>) -> Result<EnvConfig> {
    match path {
        Some(p) => ConfigFile::load(p)?.apply(EnvConfig::default()),
        None => Ok(EnvConfig::default()),
    }
}
