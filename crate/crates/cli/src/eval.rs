use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use dasmr_core::trajectory::Trajectory;
use dasmr_core::{EpisodeRecord, MetricsReport};

use crate::args::EvalArgs;

pub fn run(args: &EvalArgs) -> Result<MetricsReport> {
    let report = evaluate_dir(&args.dir, args.d_th)?;
    if args.json {
        println!("{}", report.to_json());
    } else {
        print!("{}", report.table(&format!("d_th={}", args.d_th)));
    }
    Ok(report)
}

/// Trajectory files of a directory, sorted by name.
pub fn trajectory_files(dir: &std::path::Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    Ok(files)
}

/// Re-judges every stored episode against `d_th` and aggregates.
/// Malformed files are reported one per line and fail the evaluation.
pub fn evaluate_dir(dir: &std::path::Path, d_th: f64) -> Result<MetricsReport> {
    if !(d_th.is_finite() && d_th > 0.0) {
        bail!("--d-th must be > 0, got {d_th}");
    }
    let files = trajectory_files(dir)?;
    if files.is_empty() {
        bail!("no trajectory files (*.csv) in {}", dir.display());
    }
    let mut records: Vec<EpisodeRecord> = Vec::with_capacity(files.len());
    let mut failures = 0;
    for path in &files {
        match Trajectory::load(path) {
            Ok(t) => records.push(t.episode_record(d_th)),
            Err(e) => {
                eprintln!("error: {e}");
                failures += 1;
            }
        }
    }
    if failures > 0 {
        bail!(
            "{failures} of {} trajectory files could not be read",
            files.len()
        );
    }
    Ok(MetricsReport::from_records(&records)?)
}
