//! Exit criteria for the simulator, rewards, metrics, planner and CLI.
//! Prints one PASS/FAIL line per criterion and exits nonzero if any fails.

#[path = "../../core/tests/oracle/mod.rs"]
mod oracle;

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::Parser;
use dasmr_cli::args::{HeatmapArgs, RolloutArgs};
use dasmr_cli::{eval, heatmap, rollout, Cli, Command};
use dasmr_core::kinematics::{chassis_rates, wheel_state};
use dasmr_core::metrics::{avg_error, spl, success_rate};
use dasmr_core::planner::{cem_plan, replay_poses, reward_ordering_probe, CemConfig};
use dasmr_core::rewards::{reward_field, Grid};
use dasmr_core::simulator::simulate_step;
use dasmr_core::{
    Displacement, EnvConfig, EpisodeRecord, Outcome, Pose, RewardKind, RewardSpec, RobotParams,
    SimState, VirtualBicycleCommand, DEFAULT_DT,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ms(d: Duration) -> String {
    format!("{:.0} ms", d.as_secs_f64() * 1e3)
}

fn kinematics_icr_oracle() -> Verdict {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let l = rng.random_range(0.05..1.5);
        let w = rng.random_range(0.05..1.5);
        let limit = (0.95 * f64::atan(2.0 * l / w)).min(1.4);
        let params = RobotParams {
            wheelbase_l: l,
            track_w: w,
            max_steer_angle: limit,
            ..RobotParams::default()
        };
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let phi = sign * limit * rng.random_range(1e-3..=1.0);
        let omega = rng.random_range(0.1..7.7) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        worst = worst.max(oracle::icr_mismatch(
            &params,
            VirtualBicycleCommand::new(omega, phi),
        ));
    }
    let elapsed = t0.elapsed();
    check(
        worst <= 1e-9 && elapsed < Duration::from_secs(1),
        format!(
            "1000 random (L, W, phi_c): max rel err {worst:.2e} (tol 1e-9), {}",
            ms(elapsed)
        ),
    )
}

fn degenerate_continuity() -> Verdict {
    let t0 = Instant::now();
    let params = RobotParams::default();
    let half = 500_000i64;
    let span = 0.02;
    let omega = params.max_wheel_spin;
    let outputs = |phi: f64| {
        let cmd = VirtualBicycleCommand::new(omega, phi);
        let ws = wheel_state(cmd, &params).expect("within limits");
        let (v, td) = chassis_rates(cmd, &params);
        [ws.omega_l, ws.omega_r, ws.phi_l, ws.phi_r, v, td]
    };
    let mut prev = outputs(-span);
    let mut max_jump: f64 = 0.0;
    let mut non_finite = 0usize;
    for k in -half + 1..half {
        let phi = span * k as f64 / half as f64;
        let cur = outputs(phi);
        for (a, b) in cur.iter().zip(&prev) {
            if !a.is_finite() {
                non_finite += 1;
            }
            max_jump = max_jump.max((a - b).abs());
        }
        prev = cur;
    }
    let at_zero = outputs(0.0);
    let limit_ok = at_zero == [omega, omega, 0.0, 0.0, omega * params.wheel_radius, 0.0];
    let elapsed = t0.elapsed();
    check(
        non_finite == 0 && max_jump < 1e-6 && limit_ok && elapsed < Duration::from_secs(5),
        format!(
            "10^6 points over phi_c in [-{span}, {span}): {non_finite} non-finite, max step change {max_jump:.2e} (tol 1e-6), straight limit {}, {}",
            if limit_ok { "exact" } else { "WRONG" },
            ms(elapsed)
        ),
    )
}

fn simulator_circle() -> Verdict {
    let params = RobotParams::default();
    let mut worst_residual: f64 = 0.0;
    let mut worst_radius: f64 = 0.0;
    let mut worst_lateral: f64 = 0.0;
    for (omega, phi) in [(7.7, 0.436), (-4.0, 0.25), (3.0, -0.1)] {
        let target = VirtualBicycleCommand::new(omega, phi);
        let mut state = SimState::at_rest(Pose::default());
        // Let the actuators reach the command first.
        while state.command != target {
            state = simulate_step(&state, target, &params, DEFAULT_DT).unwrap();
            worst_lateral = worst_lateral.max(state.v_lateral().abs());
        }
        let mut points = vec![(state.pose.x, state.pose.y)];
        for _ in 0..400 {
            state = simulate_step(&state, target, &params, DEFAULT_DT).unwrap();
            worst_lateral = worst_lateral.max(state.v_lateral().abs());
            points.push((state.pose.x, state.pose.y));
        }
        let (_, _, radius, residual) = oracle::fit_circle(&points);
        worst_residual = worst_residual.max(residual);
        worst_radius = worst_radius.max((radius - params.wheelbase_l / phi.abs().tan()).abs());
    }
    check(
        worst_residual < 1e-6 && worst_radius < 1e-6 && worst_lateral < 1e-12,
        format!(
            "3 commands x 400 steps: fit residual {worst_residual:.2e} m, radius error vs L cot|phi| {worst_radius:.2e} m, max |lateral v| {worst_lateral:.2e}"
        ),
    )
}

fn reference(kind: RewardKind, c: f64, dx: f64, dy: f64) -> f64 {
    match kind {
        RewardKind::Hs => oracle::reference_hs(dx, dy, c),
        RewardKind::Es => oracle::reference_es(dx, dy, c),
        RewardKind::Ch => oracle::reference_ch(dx, dy),
        RewardKind::Euclid => oracle::reference_euclid(dx, dy),
        _ => unreachable!(),
    }
}

fn reward_double_implementation() -> Verdict {
    let shaped = [
        RewardKind::Hs,
        RewardKind::Es,
        RewardKind::Ch,
        RewardKind::Euclid,
    ];
    let symmetric = [
        RewardKind::Hs,
        RewardKind::Es,
        RewardKind::Ch,
        RewardKind::Euclid,
        RewardKind::Sparse,
    ];
    let eval = |kind: RewardKind, dx: f64, dy: f64| {
        RewardSpec::new(kind).evaluate(Displacement::new(dx, dy))
    };

    let grid = Grid::square(4.0, 101);
    let mut worst: f64 = 0.0;
    let mut cone_violations = 0usize;
    for kind in shaped {
        let spec = RewardSpec::new(kind);
        let field = reward_field(&spec, grid).unwrap();
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let want = reference(kind, spec.c, grid.x(i), grid.y(j));
                worst = worst.max((field.at(i, j) - want).abs());
            }
        }
    }

    let n = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut failures: Vec<&str> = Vec::new();
    let mut point = || {
        (
            rng.random_range(-6.0..6.0),
            rng.random_range(-6.0..6.0),
            rng.random_range(-6.0..6.0),
        )
    };
    let samples: Vec<(f64, f64, f64)> = (0..n).map(|_| point()).collect();
    for &(dx, dy, _) in &samples {
        let hs = eval(RewardKind::Hs, dx, dy);
        let es = RewardSpec::new(RewardKind::Es)
            .with_c(2.0)
            .evaluate(Displacement::new(dx, dy));
        if (dy.abs() <= dx.abs() && hs != es) || (dy.abs() > dx.abs() && hs >= es) {
            cone_violations += 1;
        }
    }
    let mut property = |name: &'static str, holds: &dyn Fn(f64, f64, f64) -> bool| {
        if !samples.iter().all(|&(a, b, c)| holds(a, b, c)) {
            failures.push(name);
        }
    };
    property("even in dy", &|dx, dy, _| {
        symmetric
            .iter()
            .all(|&k| eval(k, dx, dy) == eval(k, dx, -dy))
    });
    property("even in dx", &|dx, dy, _| {
        symmetric
            .iter()
            .all(|&k| eval(k, dx, dy) == eval(k, -dx, dy))
    });
    property("maximum at goal", &|dx, dy, _| {
        shaped.iter().all(|&k| eval(k, dx, dy) < eval(k, 0.0, 0.0))
    });
    property("radial monotonicity on axes", &|a, _, b| {
        let (near, far) = if a.abs() < b.abs() { (a, b) } else { (b, a) };
        shaped.iter().all(|&k| {
            eval(k, near, 0.0) >= eval(k, far, 0.0) && eval(k, 0.0, near) >= eval(k, 0.0, far)
        })
    });
    property("monotone in |dy|", &|dx, a, b| {
        let (near, far) = if a.abs() < b.abs() { (a, b) } else { (b, a) };
        shaped
            .iter()
            .all(|&k| eval(k, dx, near) >= eval(k, dx, far))
    });

    check(
        worst <= 1e-12 && cone_violations == 0 && failures.is_empty(),
        format!(
            "101x101 grid max |impl - reference| {worst:.1e} (tol 1e-12); cone identity violations {cone_violations}/{n}; invariants over {n} points: {}",
            if failures.is_empty() { "all hold".to_string() } else { format!("FAILED {failures:?}") }
        ),
    )
}

fn heatmap_args(out: &Path, extra: &[&str]) -> HeatmapArgs {
    let mut argv = vec!["dasmr", "heatmap", "--out", out.to_str().unwrap()];
    argv.extend_from_slice(extra);
    match Cli::try_parse_from(argv).unwrap().command {
        Command::Heatmap(a) => a,
        _ => unreachable!(),
    }
}

/// Position along a monotone profile where it crosses `level`, by linear
/// interpolation between samples.
fn crossing(coords: &[f64], values: &[f64], level: f64) -> f64 {
    for k in 1..values.len() {
        let (a, b) = (values[k - 1], values[k]);
        if (a - level) * (b - level) <= 0.0 && a != b {
            let t = (level - a) / (b - a);
            return coords[k - 1] + t * (coords[k] - coords[k - 1]);
        }
    }
    f64::NAN
}

fn heatmap_reproduction() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut grids = Vec::new();
    let mut notes = Vec::new();
    for flags in [
        &["--reward", "es", "--c", "4.0"][..],
        &["--reward", "ch"][..],
        &["--reward", "hs", "--c", "2.0"][..],
        &["--reward", "cl", "--c", "3.0"][..],
        &["--reward", "euclid"][..],
    ] {
        let args = heatmap_args(dir.path(), flags);
        let out = heatmap::execute(&args).unwrap();
        let rows = heatmap::read_csv(&out.csv).unwrap();
        let png = image::image_dimensions(&out.png).unwrap();
        let shape_ok =
            rows.len() == 101 && rows.iter().all(|r| r.len() == 101) && png == (101, 101);
        if !shape_ok {
            notes.push(format!("{} grid/image not 101x101", flags[1]));
        }
        grids.push(rows);
    }
    let [es, ch, hs, _cl, _euclid] = <[Vec<Vec<f64>>; 5]>::try_from(grids).unwrap();
    let axis: Vec<f64> = (0..101).map(|k| Grid::square(4.0, 101).x(k)).collect();
    let mid = 50;

    // ES: along +x the level -v sits at v, along +y at v / c.
    let mut worst_ratio: f64 = 0.0;
    for level in [-0.5, -1.0, -2.0, -3.0] {
        let along_x: Vec<f64> = es[mid][mid..].to_vec();
        let along_y: Vec<f64> = es[mid..].iter().map(|r| r[mid]).collect();
        let rx = crossing(&axis[mid..], &along_x, level);
        let ry = crossing(&axis[mid..], &along_y, level);
        worst_ratio = worst_ratio.max((rx / ry / 4.0 - 1.0).abs());
    }

    // Ch: every square ring around the center carries one value, -ring radius.
    let mut ch_bad = 0;
    for (j, row) in ch.iter().enumerate() {
        for (i, v) in row.iter().enumerate() {
            let ring = (i as i64 - mid as i64)
                .abs()
                .max((j as i64 - mid as i64).abs()) as usize;
            if *v != -axis[mid + ring] {
                ch_bad += 1;
            }
        }
    }

    // HS against ES at the same c.
    let es2 = reward_field(
        &RewardSpec::new(RewardKind::Es).with_c(2.0),
        Grid::square(4.0, 101),
    )
    .unwrap();
    let mut cone_bad = 0;
    for (j, row) in hs.iter().enumerate() {
        for (i, v) in row.iter().enumerate() {
            let (dx, dy) = (axis[i], axis[j]);
            let reference = es2.at(i, j);
            let ok = if dy.abs() <= dx.abs() {
                *v == reference
            } else {
                *v < reference
            };
            if !ok {
                cone_bad += 1;
            }
        }
    }
    check(
        notes.is_empty() && worst_ratio <= 0.01 && ch_bad == 0 && cone_bad == 0,
        format!(
            "5 heatmaps 101x101 (csv+png); ES axis ratio error {:.2e} (tol 1 %); Ch off-square cells {ch_bad}; HS/ES cone mismatches {cone_bad}{}",
            worst_ratio,
            if notes.is_empty() { String::new() } else { format!("; {}", notes.join(", ")) }
        ),
    )
}

fn synthetic_records(rng: &mut ChaCha8Rng, n: usize) -> Vec<EpisodeRecord> {
    (0..n)
        .map(|_| {
            let start = Pose::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                0.0,
            );
            let goal = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let success = rng.random_bool(0.6);
            let straight = start.distance_to(goal.0, goal.1);
            EpisodeRecord {
                goal,
                start_pose: start,
                outcome: if success {
                    Outcome::Success
                } else {
                    Outcome::TruncatedTime
                },
                final_distance: rng.random_range(0.0..3.0),
                path_length: straight * rng.random_range(0.8..4.0),
                steps: rng.random_range(1..800),
            }
        })
        .collect()
}

fn rollout_args(seed: u64, policy: &str, out: &Path) -> RolloutArgs {
    let argv = [
        "dasmr",
        "rollout",
        "--seed",
        &seed.to_string(),
        "--max-steps",
        "300",
        "--episodes",
        "20",
        "--policy",
        policy,
        "--out",
        out.to_str().unwrap(),
    ];
    match Cli::try_parse_from(argv).unwrap().command {
        Command::Rollout(a) => a,
        _ => unreachable!(),
    }
}

fn metric_formulas() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let records = synthetic_records(&mut rng, 50);
    let n = records.len() as f64;
    let mut succ = 0.0;
    let mut spl_sum = 0.0;
    let mut dist = 0.0;
    for r in &records {
        if r.outcome == Outcome::Success {
            succ += 1.0;
            let l = (r.goal.0 - r.start_pose.x).hypot(r.goal.1 - r.start_pose.y);
            spl_sum += l / r.path_length.max(l);
        }
        dist += r.final_distance;
    }
    let mean = dist / n;
    let sigma = (records
        .iter()
        .map(|r| (r.final_distance - mean).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let (ae, s) = avg_error(&records).unwrap();
    let formula_err = [
        success_rate(&records).unwrap() - succ / n,
        spl(&records).unwrap() - spl_sum / n,
        ae - mean,
        s - sigma,
    ]
    .iter()
    .fold(0.0f64, |m, e| m.max(e.abs()));

    let spl_violations = (0..1000)
        .filter(|_| {
            let size = rng.random_range(1..40);
            let batch = synthetic_records(&mut rng, size);
            spl(&batch).unwrap() > success_rate(&batch).unwrap()
        })
        .count();

    let mut nested_bad = Vec::new();
    let mut sets = 0;
    let dir = tempfile::tempdir().unwrap();
    for seed in [10u64, 52, 1234, 9527] {
        for policy in ["pursuit", "random"] {
            let out = dir.path().join(format!("{policy}-{seed}"));
            rollout::execute(&rollout_args(seed, policy, &out)).unwrap();
            let strict = eval::evaluate_dir(&out, 0.10).unwrap();
            let loose = eval::evaluate_dir(&out, 0.15).unwrap();
            sets += 1;
            if strict.sr > loose.sr {
                nested_bad.push(format!("{policy}/{seed}"));
            }
        }
    }
    check(
        formula_err <= 1e-12 && spl_violations == 0 && nested_bad.is_empty(),
        format!(
            "50 records max err {formula_err:.1e} (tol 1e-12); SPL > SR in {spl_violations}/1000 batches; SR(0.10) > SR(0.15) in {}/{sets} rollout sets",
            nested_bad.len()
        ),
    )
}

const SEEDS: [u64; 4] = [10, 52, 1234, 9527];

struct LateralPlan {
    seed: u64,
    actions: Vec<dasmr_core::Action>,
}

fn maneuver_reachability(lateral: &mut Vec<LateralPlan>) -> Verdict {
    let t0 = Instant::now();
    let mut misses = Vec::new();
    let mut worst: f64 = 0.0;
    for goal in [(2.0, 0.0), (-2.0, 0.0), (0.0, 2.0)] {
        for seed in SEEDS {
            let env = EnvConfig::evaluation(seed, 300);
            let cem = CemConfig {
                horizon: 300,
                seed,
                ..CemConfig::default()
            };
            let plan = cem_plan(&env, goal, &env.reward_spec(), &cem).unwrap();
            let (poses, terminated) = replay_poses(&env, goal, &plan.actions).unwrap();
            let replayed = poses.last().unwrap().distance_to(goal.0, goal.1);
            worst = worst.max(replayed);
            if !(plan.reached && terminated && replayed < 0.15) {
                misses.push(format!("{goal:?}/seed {seed}: d = {replayed:.3}"));
            }
            if goal == (0.0, 2.0) && plan.reached {
                lateral.push(LateralPlan {
                    seed,
                    actions: plan.actions,
                });
            }
        }
    }
    let elapsed = t0.elapsed();
    check(
        misses.is_empty() && elapsed < Duration::from_secs(300),
        format!(
            "goals (2,0) (-2,0) (0,2) x seeds {SEEDS:?}: worst replayed final distance {worst:.3} m (tol 0.15), {:.1} s{}",
            elapsed.as_secs_f64(),
            if misses.is_empty() { String::new() } else { format!("; missed {}", misses.join(", ")) }
        ),
    )
}

fn reward_ordering_probe_check(lateral: &[LateralPlan]) -> Verdict {
    if lateral.is_empty() {
        return Err("no successful (0,2) maneuver to probe".into());
    }
    let specs = [
        RewardSpec::new(RewardKind::Hs).with_c(2.0),
        RewardSpec::new(RewardKind::Euclid),
    ];
    let mut parts = Vec::new();
    let mut all_positive = true;
    for p in lateral {
        let env = EnvConfig::evaluation(p.seed, 300);
        let (poses, _) = replay_poses(&env, (0.0, 2.0), &p.actions).unwrap();
        let r = reward_ordering_probe(&poses, (0.0, 2.0), &specs);
        let diff = r[0].cumulative - r[1].cumulative;
        all_positive &= diff > 0.0;
        parts.push(format!(
            "seed {}: HS - Euclid = {diff:.2} (away-phase loss HS {:.3} vs Euclid {:.3})",
            p.seed, r[0].away_loss, r[1].away_loss
        ));
    }
    check(
        all_positive,
        format!(
            "cumulative HS(c=2) - Euclid must be > 0; {}",
            parts.join("; ")
        ),
    )
}

fn rollout_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut notes = Vec::new();
    let mut ok = true;
    for policy in ["pursuit", "random", "cem"] {
        let a = dir.path().join(format!("{policy}-a"));
        let b = dir.path().join(format!("{policy}-b"));
        let ra = rollout::execute(&rollout_args(10, policy, &a)).unwrap();
        rollout::execute(&rollout_args(10, policy, &b)).unwrap();
        let (fa, fb) = (rollout_bytes(&a), rollout_bytes(&b));
        let same = fa == fb && fa.len() == 21 && ra.report.n_episodes == 20;
        ok &= same;
        notes.push(format!(
            "{policy} {}",
            if same { "identical" } else { "DIFFERENT" }
        ));
    }
    check(
        ok,
        format!(
            "seed 10, 20 episodes + report.json, two runs each: {}",
            notes.join(", ")
        ),
    )
}

fn main() -> ExitCode {
    let mut lateral = Vec::new();
    let results: Vec<(&str, Verdict)> = vec![
        ("kinematics ICR oracle", kinematics_icr_oracle()),
        ("degenerate continuity", degenerate_continuity()),
        ("simulator circle", simulator_circle()),
        (
            "reward double implementation",
            reward_double_implementation(),
        ),
        ("heatmap reproduction", heatmap_reproduction()),
        ("metric formulas", metric_formulas()),
        ("maneuver reachability", maneuver_reachability(&mut lateral)),
        (
            "reward-ordering probe",
            reward_ordering_probe_check(&lateral),
        ),
        ("determinism", determinism()),
    ];
    let mut failed = 0;
    println!();
    for (k, (name, verdict)) in results.iter().enumerate() {
        let (tag, detail) = match verdict {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("[{tag}] {}. {name}: {detail}", k + 1);
    }
    println!(
        "\nacceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
