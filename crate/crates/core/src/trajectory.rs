//! Replayable per-episode trajectory files.
//!
//! A file is a single `#`-prefixed JSON header line followed by a CSV table
//! with one row per environment step:
//!
//! ```text
//! # {"format":"dasmr-trajectory/1","episode":0,"policy":"pursuit","goal":[..],"config":{..},"start_state":{..}}
//! step,time,x_c,y_c,theta_c,omega_l,omega_r,phi_l,phi_r,phi_dot_l,phi_dot_r,v_x,v_y,theta_dot,a_omega,a_phi,reward,terminated,truncated
//! 1,2.5000000000000000e-2,...
//! ```
//!
//! Floats are written with 17 significant digits, which round-trips every
//! `f64`, so re-simulating the recorded actions from the header reproduces
//! the stored states exactly.

use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::environment::{Action, EnvConfig, Environment, StepResult};
use crate::error::{Error, Result};
use crate::metrics::{EpisodeRecord, Outcome};
use crate::planner::Policy;
use crate::simulator::{self, Pose, SimState};

pub const FORMAT_TAG: &str = "dasmr-trajectory/1";

pub const COLUMNS: [&str; 19] = [
    "step",
    "time",
    "x_c",
    "y_c",
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
    "a_omega",
    "a_phi",
    "reward",
    "terminated",
    "truncated",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryHeader {
    pub format: String,
    pub episode: usize,
    pub policy: String,
    pub goal: (f64, f64),
    pub config: EnvConfig,
    pub start_state: SimState,
}

impl TrajectoryHeader {
    /// Header describing the current episode of `env`.
    pub fn for_episode(env: &Environment, episode: usize, policy: &str) -> Self {
        Self {
            format: FORMAT_TAG.to_string(),
            episode,
            policy: policy.to_string(),
            goal: env.goal(),
            config: *env.config(),
            start_state: *env.episode_start(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub step: u64,
    pub time: f64,
    /// State after the step. The file has no columns for the applied
    /// command, so it reads back as zero.
    pub state: SimState,
    pub action: Action,
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
}

impl TrajectoryRow {
    pub fn new(action: Action, state: &SimState, result: &StepResult, dt: f64) -> Self {
        Self {
            step: result.info.step,
            time: result.info.step as f64 * dt,
            state: *state,
            action,
            reward: result.reward,
            terminated: result.terminated,
            truncated: result.truncated,
        }
    }

    fn fields(&self) -> Vec<String> {
        let s = &self.state;
        let floats = [
            self.time,
            s.pose.x,
            s.pose.y,
            s.pose.theta,
            s.wheels.omega_l,
            s.wheels.omega_r,
            s.wheels.phi_l,
            s.wheels.phi_r,
            s.phi_dot_l,
            s.phi_dot_r,
            s.v_x,
            s.v_y,
            s.theta_dot,
            self.action.a_omega,
            self.action.a_phi,
            self.reward,
        ];
        let mut out = Vec::with_capacity(COLUMNS.len());
        out.push(self.step.to_string());
        out.extend(floats.iter().map(|v| format!("{v:.16e}")));
        out.push(u8::from(self.terminated).to_string());
        out.push(u8::from(self.truncated).to_string());
        out
    }

    fn parse(record: &csv::StringRecord, line: u64) -> Result<Self> {
        if record.len() != COLUMNS.len() {
            return Err(Error::Format(format!(
                "line {line}: expected {} columns, found {}",
                COLUMNS.len(),
                record.len()
            )));
        }
        let float = |i: usize| -> Result<f64> {
            record[i]
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Format(format!("line {line}, column {}: {e}", COLUMNS[i])))
        };
        let flag = |i: usize| -> Result<bool> {
            match record[i].trim() {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(Error::Format(format!(
                    "line {line}, column {}: expected 0 or 1, found '{other}'",
                    COLUMNS[i]
                ))),
            }
        };
        let step = record[0]
            .trim()
            .parse::<u64>()
            .map_err(|e| Error::Format(format!("line {line}, column step: {e}")))?;
        let mut state = SimState {
            pose: Pose {
                x: float(2)?,
                y: float(3)?,
                theta: float(4)?,
            },
            step_index: step,
            ..SimState::default()
        };
        state.wheels.omega_l = float(5)?;
        state.wheels.omega_r = float(6)?;
        state.wheels.phi_l = float(7)?;
        state.wheels.phi_r = float(8)?;
        state.phi_dot_l = float(9)?;
        state.phi_dot_r = float(10)?;
        state.v_x = float(11)?;
        state.v_y = float(12)?;
        state.theta_dot = float(13)?;
        Ok(Self {
            step,
            time: float(1)?,
            state,
            action: Action {
                a_omega: float(14)?,
                a_phi: float(15)?,
            },
            reward: float(16)?,
            terminated: flag(17)?,
            truncated: flag(18)?,
        })
    }
}

/// Header plus per-step rows of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub header: TrajectoryHeader,
    pub rows: Vec<TrajectoryRow>,
}

impl Trajectory {
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        let header =
            serde_json::to_string(&self.header).map_err(|e| Error::Format(e.to_string()))?;
        writeln!(out, "# {header}").map_err(io_err)?;
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(COLUMNS).map_err(csv_err)?;
        for row in &self.rows {
            writer.write_record(row.fields()).map_err(csv_err)?;
        }
        writer.flush().map_err(io_err)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)
            .map_err(|e| Error::Format(format!("cannot create {}: {e}", path.display())))?;
        self.write_to(std::io::BufWriter::new(file))
    }

    pub fn read_from<R: Read>(input: R) -> Result<Self> {
        let mut reader = BufReader::new(input);
        let mut first = String::new();
        reader.read_line(&mut first).map_err(io_err)?;
        let json = first
            .trim_end()
            .strip_prefix('#')
            .ok_or_else(|| Error::Format("missing '#' header line".into()))?;
        let header: TrajectoryHeader = serde_json::from_str(json.trim())
            .map_err(|e| Error::Format(format!("bad header: {e}")))?;
        if header.format != FORMAT_TAG {
            return Err(Error::Format(format!(
                "unsupported format '{}'",
                header.format
            )));
        }
        let mut csv_reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let columns = csv_reader.headers().map_err(csv_err)?.clone();
        if columns.iter().ne(COLUMNS.iter().copied()) {
            return Err(Error::Format("unexpected column layout".into()));
        }
        let mut rows = Vec::new();
        for (k, record) in csv_reader.records().enumerate() {
            let record = record.map_err(csv_err)?;
            rows.push(TrajectoryRow::parse(&record, k as u64 + 3)?);
        }
        if rows.len() as u64 > header.config.max_episode_steps {
            return Err(Error::Format(format!(
                "{} rows exceed max_episode_steps {}",
                rows.len(),
                header.config.max_episode_steps
            )));
        }
        Ok(Self { header, rows })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Format(format!("cannot open {}: {e}", path.display())))?;
        Self::read_from(file).map_err(|e| match e {
            Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn actions(&self) -> Vec<Action> {
        self.rows.iter().map(|r| r.action).collect()
    }

    /// Start pose followed by the pose after every step.
    pub fn poses(&self) -> Vec<Pose> {
        std::iter::once(self.header.start_state.pose)
            .chain(self.rows.iter().map(|r| r.state.pose))
            .collect()
    }

    /// Re-simulates the recorded actions from the header's start state.
    pub fn replay(&self) -> Result<Vec<SimState>> {
        let cfg = &self.header.config;
        let mut state = self.header.start_state;
        self.rows
            .iter()
            .map(|row| {
                let target = row.action.to_command(&cfg.robot);
                state = simulator::simulate_step(&state, target, &cfg.robot, cfg.dt)?;
                Ok(state)
            })
            .collect()
    }

    /// Episode summary judged against `d_th`. Success is the first step
    /// whose center lies strictly within `d_th` of the goal; the path and
    /// step count are cut there.
    pub fn episode_record(&self, d_th: f64) -> EpisodeRecord {
        let goal = self.header.goal;
        let start = self.header.start_state.pose;
        let mut path_length = 0.0;
        let mut prev = start;
        let mut final_distance = start.distance_to(goal.0, goal.1);
        // A plan that starts on the goal has no rows at all.
        let mut outcome =
            (self.rows.is_empty() && final_distance < d_th).then_some(Outcome::Success);
        let mut steps = 0;
        for row in &self.rows {
            let pose = row.state.pose;
            path_length += prev.distance_to(pose.x, pose.y);
            prev = pose;
            steps = row.step;
            final_distance = pose.distance_to(goal.0, goal.1);
            if final_distance < d_th {
                outcome = Some(Outcome::Success);
                break;
            }
        }
        let outcome = outcome.unwrap_or_else(|| {
            if self.header.config.out_of_bounds(&prev) {
                Outcome::TruncatedBounds
            } else {
                Outcome::TruncatedTime
            }
        });
        EpisodeRecord {
            goal,
            start_pose: start,
            outcome,
            final_distance,
            path_length,
            steps,
        }
    }
}

impl fmt::Display for Trajectory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut buf = Vec::new();
        self.write_to(&mut buf).map_err(|_| fmt::Error)?;
        f.write_str(std::str::from_utf8(&buf).map_err(|_| fmt::Error)?)
    }
}

/// Runs one episode of an already-reset environment under `policy`.
pub fn record_episode(
    env: &mut Environment,
    policy: &mut dyn Policy,
    episode: usize,
    policy_name: &str,
) -> Result<Trajectory> {
    let header = TrajectoryHeader::for_episode(env, episode, policy_name);
    policy.reset();
    let dt = env.config().dt;
    let mut obs = env.observation();
    let mut rows = Vec::new();
    loop {
        let action = policy.act(&obs);
        let result = env.step(action)?;
        rows.push(TrajectoryRow::new(action, env.state(), &result, dt));
        obs = result.observation;
        if result.done() {
            break;
        }
    }
    Ok(Trajectory { header, rows })
}

fn io_err(e: std::io::Error) -> Error {
    Error::Format(e.to_string())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}
