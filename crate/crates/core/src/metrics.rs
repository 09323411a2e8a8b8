//! Evaluation metrics over batches of episodes: success rate, average
//! final distance error with its standard deviation, SPL, and the sliding
//! training monitor.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::Pose;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    TruncatedTime,
    TruncatedBounds,
}

/// Summary of one finished episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub goal: (f64, f64),
    pub start_pose: Pose,
    pub outcome: Outcome,
    /// Distance from the center to the goal at the last step, m.
    pub final_distance: f64,
    /// Sum of consecutive center displacements, m.
    pub path_length: f64,
    pub steps: u64,
}

impl EpisodeRecord {
    pub fn is_success(&self) -> bool {
        self.outcome == Outcome::Success
    }

    /// Straight-line start-to-goal distance, the reference shortest path.
    pub fn shortest_path(&self) -> f64 {
        self.start_pose.distance_to(self.goal.0, self.goal.1)
    }

    /// Contribution to SPL: `S * l / max(p, l)`.
    pub fn spl_term(&self) -> f64 {
        if !self.is_success() {
            return 0.0;
        }
        let l = self.shortest_path();
        let denom = self.path_length.max(l);
        if denom == 0.0 {
            // Started on the goal: nothing to travel, full efficiency.
            1.0
        } else {
            l / denom
        }
    }
}

fn non_empty(records: &[EpisodeRecord]) -> Result<()> {
    if records.is_empty() {
        Err(Error::Argument(
            "metrics need at least one episode record".into(),
        ))
    } else {
        Ok(())
    }
}

pub fn success_rate(records: &[EpisodeRecord]) -> Result<f64> {
    non_empty(records)?;
    let n = records.iter().filter(|r| r.is_success()).count();
    Ok(n as f64 / records.len() as f64)
}

/// Mean and population standard deviation of the final distance over all
/// episodes, successful or not.
pub fn avg_error(records: &[EpisodeRecord]) -> Result<(f64, f64)> {
    non_empty(records)?;
    let n = records.len() as f64;
    let mean = records.iter().map(|r| r.final_distance).sum::<f64>() / n;
    let var = records
        .iter()
        .map(|r| (r.final_distance - mean).powi(2))
        .sum::<f64>()
        / n;
    Ok((mean, var.sqrt()))
}

pub fn spl(records: &[EpisodeRecord]) -> Result<f64> {
    non_empty(records)?;
    Ok(records.iter().map(EpisodeRecord::spl_term).sum::<f64>() / records.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub sr: f64,
    pub ae: f64,
    pub sigma: f64,
    pub spl: f64,
    pub n_episodes: usize,
}

impl MetricsReport {
    pub fn from_records(records: &[EpisodeRecord]) -> Result<Self> {
        let (ae, sigma) = avg_error(records)?;
        Ok(Self {
            sr: success_rate(records)?,
            ae,
            sigma,
            spl: spl(records)?,
            n_episodes: records.len(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned text table: SR in percent, AE(sigma) in meters, SPL.
    pub fn table(&self, label: &str) -> String {
        let width = label.len().max(6);
        format!(
            "{:<width$}  {:>6}  {:>14}  {:>5}  {:>4}\n{:<width$}  {:>6.1}  {:>14}  {:>5.2}  {:>4}\n",
            "method",
            "SR",
            "AE(sigma)",
            "SPL",
            "N",
            label,
            self.sr * 100.0,
            format!("{:.2}({:.2})", self.ae, self.sigma),
            self.spl,
            self.n_episodes,
        )
    }
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.table("episodes"))
    }
}

/// What the monitor needs from a finished training episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeSummary {
    pub total_reward: f64,
    pub success: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorPoint {
    /// Number of episodes seen when the point was logged.
    pub episode: usize,
    pub mean_reward: f64,
    pub success_rate: f64,
}

/// Windowed mean reward and success rate, logged every `log_every`
/// episodes. Before the window fills it averages over everything seen.
#[derive(Debug, Clone)]
pub struct SlidingMonitor {
    window: usize,
    log_every: usize,
    seen: usize,
    recent: VecDeque<EpisodeSummary>,
}

impl Default for SlidingMonitor {
    fn default() -> Self {
        Self::new(100, 10)
    }
}

impl SlidingMonitor {
    pub fn new(window: usize, log_every: usize) -> Self {
        assert!(
            window > 0 && log_every > 0,
            "window and log interval must be positive"
        );
        Self {
            window,
            log_every,
            seen: 0,
            recent: VecDeque::with_capacity(window),
        }
    }

    pub fn push(&mut self, episode: EpisodeSummary) -> Option<MonitorPoint> {
        if self.recent.len() == self.window {
            self.recent.pop_front();
        }
        self.recent.push_back(episode);
        self.seen += 1;
        if !self.seen.is_multiple_of(self.log_every) {
            return None;
        }
        let n = self.recent.len() as f64;
        Some(MonitorPoint {
            episode: self.seen,
            mean_reward: self.recent.iter().map(|e| e.total_reward).sum::<f64>() / n,
            success_rate: self.recent.iter().filter(|e| e.success).count() as f64 / n,
        })
    }
}

/// Runs a monitor over a whole stream.
pub fn sliding_monitor<I>(episodes: I, window: usize, log_every: usize) -> Vec<MonitorPoint>
where
    I: IntoIterator<Item = EpisodeSummary>,
{
    let mut monitor = SlidingMonitor::new(window, log_every);
    episodes
        .into_iter()
        .filter_map(|e| monitor.push(e))
        .collect()
}
