//! Reward heatmaps: a CSV grid (one line per y value from -extent to
//! +extent, x increasing along each line) and a PNG rendered with +y up.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use dasmr_core::rewards::{reward_field, Grid, RewardField};
use image::{Rgb, RgbImage};

use crate::args::HeatmapArgs;

pub struct HeatmapOutput {
    pub field: RewardField,
    pub csv: PathBuf,
    pub png: PathBuf,
}

pub fn run(args: &HeatmapArgs) -> Result<HeatmapOutput> {
    let out = execute(args)?;
    println!(
        "{} {}x{} -> {}, {}",
        args.spec(),
        out.field.grid.nx,
        out.field.grid.ny,
        out.csv.display(),
        out.png.display()
    );
    Ok(out)
}

pub fn execute(args: &HeatmapArgs) -> Result<HeatmapOutput> {
    let spec = args.spec();
    let field = reward_field(&spec, Grid::square(args.extent, args.resolution))?;
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let stem = spec.kind.name();
    let csv = args.out.join(format!("{stem}.csv"));
    let png = args.out.join(format!("{stem}.png"));
    write_csv(&field, &csv)?;
    render(&field)
        .save(&png)
        .with_context(|| format!("writing {}", png.display()))?;
    Ok(HeatmapOutput { field, csv, png })
}

pub fn write_csv(field: &RewardField, path: &Path) -> Result<()> {
    let file =
        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = std::io::BufWriter::new(file);
    for row in field.values.chunks(field.grid.nx) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a grid written by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .map(|line| {
            line.split(',')
                .map(|v| v.parse::<f64>().with_context(|| format!("bad value '{v}'")))
                .collect()
        })
        .collect()
}

const PALETTE: [[f64; 3]; 5] = [
    [68.0, 1.0, 84.0],
    [59.0, 82.0, 139.0],
    [33.0, 145.0, 140.0],
    [94.0, 201.0, 98.0],
    [253.0, 231.0, 37.0],
];

/// Viridis-like colour for `t` in [0, 1].
pub fn colormap(t: f64) -> Rgb<u8> {
    let t = if t.is_finite() {
        t.clamp(0.0, 1.0)
    } else {
        0.0
    };
    let pos = t * (PALETTE.len() - 1) as f64;
    let k = (pos.floor() as usize).min(PALETTE.len() - 2);
    let f = pos - k as f64;
    let c = |i: usize| (PALETTE[k][i] + f * (PALETTE[k + 1][i] - PALETTE[k][i])).round() as u8;
    Rgb([c(0), c(1), c(2)])
}

pub fn render(field: &RewardField) -> RgbImage {
    let (nx, ny) = (field.grid.nx, field.grid.ny);
    let lo = field.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = field
        .values
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    RgbImage::from_fn(nx as u32, ny as u32, |px, py| {
        let j = ny - 1 - py as usize;
        colormap((field.at(px as usize, j) - lo) / span)
    })
}
