//! Acceptance suite. Runs every exit criterion, prints one PASS/FAIL line
//! each, and exits non-zero if any criterion fails.
//!
//! Run with `cargo test -p ntlkit --test acceptance`.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use ntlkit::debloom::{apply_debloom, detect_pseudo_light, fit_bloom_model, PseudoPixelPolicy};
use ntlkit::desat::{
    apply_desaturation, detect_saturated, fit_saturation_model, select_saturation_samples,
    SampleSelectionPolicy,
};
use ntlkit::intercal::fit_intercalibration;
use ntlkit::raster::{extract_pairs, read_grid, write_grid, Grid, PixelMask};
use ntlkit::regression::{fit_ols, mse};
use ntlkit::synth::{
    forward_bloom, forward_bloom_with_noise, forward_intercal, forward_saturate, gen_scene,
    isolated_sources, log_uniform_field, SceneSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

// Tolerances and thresholds, one per criterion.
const AC1_PUBLISHED_REL_TOL: f64 = 5e-4;
const AC1_ARITH_TOL: f64 = 1e-8;
const AC2_REL_TOL: f64 = 1e-9;
const AC2_BUDGET: Duration = Duration::from_secs(1);
const AC3_TOL: f64 = 1e-9;
const AC3_BUDGET: Duration = Duration::from_secs(1);
const AC4_NOISELESS_REL_TOL: f64 = 1e-9;
const AC4_NOISY_REL_TOL: f64 = 0.05;
const AC4_NOISE_SIGMA: f64 = 0.05;
const AC4_SEEDS: u64 = 20;
const AC4_PSEUDO_MAX_AFTER: f64 = 1e-6;
const AC4_BUDGET: Duration = Duration::from_secs(5);
const AC5_ORTHO_REL_TOL: f64 = 1e-9;
const AC5_INVARIANCE_REL_TOL: f64 = 1e-12;
const AC5_PERTURBATION: f64 = 1e-3;
const AC5_POINTS: usize = 1_000_000;
const AC5_BUDGET: Duration = Duration::from_secs(10);
const AC6_GRIDS: usize = 100;
const AC6_BUDGET: Duration = Duration::from_secs(5);
const AC7_SIZE: usize = 1000;
const AC7_RADIUS: usize = 5;
const AC7_BUDGET: Duration = Duration::from_secs(10);

type Outcome = Result<String, String>;
type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(start: Instant, budget: Duration) -> Result<Duration, String> {
    let took = start.elapsed();
    check(took < budget, || format!("took {took:?}, budget {budget:?}"))?;
    Ok(took)
}

fn rel(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

/// Published one-year MSE values versus direct arithmetic on the published
/// actual and predicted GDP.
fn ac1_mse_arithmetic() -> Outcome {
    let cases: [(f64, f64, f64); 2] = [(227.37, 4585.9984, 4586.61), (133.33, 26166.2976, 26165.73)];
    let mut notes = Vec::new();
    for (predicted, arithmetic, published) in cases {
        let got = mse(&[295.09], &[predicted]).map_err(|e| e.to_string())?;
        check((got - arithmetic).abs() <= AC1_ARITH_TOL, || {
            format!("mse(295.09, {predicted}) = {got}, expected {arithmetic}")
        })?;
        let r = rel(got, published);
        check(r <= AC1_PUBLISHED_REL_TOL, || {
            format!("{got} vs published {published}: rel {r:.3e} > {AC1_PUBLISHED_REL_TOL}")
        })?;
        notes.push(format!("{got:.4} vs {published} (rel {r:.2e})"));
    }
    Ok(notes.join("; "))
}

fn ac2_intercalibration_recovery() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let dn = Grid::from_fn(63, 1, |c| c.col as f64).map_err(|e| e.to_string())?;
    let all = PixelMask::from_fn(63, 1, |_| true);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let a = rng.random_range(0.5..3.0);
        let b = rng.random_range(0.5..1.5);
        let calibrated = forward_intercal(&dn, a, b).map_err(|e| e.to_string())?;
        let pairs = extract_pairs(&dn, &calibrated, &all).map_err(|e| e.to_string())?;
        let m = fit_intercalibration(&pairs).map_err(|e| e.to_string())?;
        let (ra, rb) = (rel(m.a, a), rel(m.b, b));
        check(ra <= AC2_REL_TOL && rb <= AC2_REL_TOL, || {
            format!("(a={a}, b={b}) recovered as ({}, {}): rel ({ra:.2e}, {rb:.2e})", m.a, m.b)
        })?;
        worst = worst.max(ra).max(rb);
    }
    let took = within_budget(start, AC2_BUDGET)?;
    Ok(format!("20 models, worst rel err {worst:.2e}, {took:?}"))
}

fn ac3_desaturation_recovery() -> Outcome {
    let start = Instant::now();
    let (a, b) = (10.0, 5.0);
    let radiance: Grid<f64> = log_uniform_field(100, 100, 1.0, 3000.0, 3).map_err(|e| e.to_string())?;
    let ntl = forward_saturate(&radiance, a, b, 63.0).map_err(|e| e.to_string())?;
    let sat = detect_saturated(&ntl, 63.0);
    check(sat.count() > 0 && sat.count() < 10_000, || {
        format!("fixture has {} saturated cells", sat.count())
    })?;
    let samples = select_saturation_samples(&ntl, &radiance, &sat, &SampleSelectionPolicy::default())
        .map_err(|e| e.to_string())?;
    let model = fit_saturation_model(&samples).map_err(|e| e.to_string())?;
    check((model.a - a).abs() <= AC3_TOL && (model.b - b).abs() <= AC3_TOL, || {
        format!("recovered ({}, {})", model.a, model.b)
    })?;
    let corrected = apply_desaturation(&ntl, &radiance, &sat, &model).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    let mut above_cap = 0;
    for c in sat.iter_true() {
        let truth = a * radiance.get(c).ln() + b;
        let err = (corrected.get(c) - truth).abs();
        worst = worst.max(err);
        if corrected.get(c) > 63.0 {
            above_cap += 1;
        }
    }
    check(worst <= AC3_TOL, || format!("saturated cell error {worst:.2e}"))?;
    let took = within_budget(start, AC3_BUDGET)?;
    Ok(format!(
        "{} saturated cells ({above_cap} restored above 63), {} samples, max err {worst:.2e}, {took:?}",
        sat.count(),
        samples.len()
    ))
}

fn ac4_deblooming_recovery() -> Outcome {
    let start = Instant::now();
    let (a, b, radius) = (0.5, 0.2, 3);
    let sources = isolated_sources(50, 50, 5, 8, 4, (11.0, 19.0), 4).map_err(|e| e.to_string())?;
    let truth: Grid<f64> = gen_scene(&SceneSpec {
        ncols: 50,
        nrows: 50,
        sources,
        background: 0.0,
        seed: 4,
    })
    .map_err(|e| e.to_string())?;

    let policy = PseudoPixelPolicy::<f64>::default();
    let bloomed = forward_bloom(&truth, a, b, radius).map_err(|e| e.to_string())?;
    let pseudo = detect_pseudo_light(&bloomed, &policy).map_err(|e| e.to_string())?;
    let m = fit_bloom_model(&bloomed, &pseudo, radius, policy.pseudo_max_dn).map_err(|e| e.to_string())?;
    check(
        rel(m.a, a) <= AC4_NOISELESS_REL_TOL && rel(m.b, b) <= AC4_NOISELESS_REL_TOL,
        || format!("noiseless fit ({}, {})", m.a, m.b),
    )?;
    let corrected = apply_debloom(&bloomed, &m).map_err(|e| e.to_string())?;
    let worst_pseudo = pseudo
        .iter_true()
        .map(|c| corrected.get(c))
        .fold(0.0_f64, f64::max);
    check(worst_pseudo <= AC4_PSEUDO_MAX_AFTER, || {
        format!("pseudo pixel left at {worst_pseudo}")
    })?;

    let noisy_policy = PseudoPixelPolicy {
        min_background_neighbors: 2,
        ..policy
    };
    let (mut sum_a, mut sum_b) = (0.0, 0.0);
    let mut n_pseudo = 0;
    for seed in 0..AC4_SEEDS {
        let noisy = forward_bloom_with_noise(&truth, a, b, radius, AC4_NOISE_SIGMA, seed)
            .map_err(|e| e.to_string())?;
        let p = detect_pseudo_light(&noisy, &noisy_policy).map_err(|e| e.to_string())?;
        n_pseudo = p.count();
        let fit = fit_bloom_model(&noisy, &p, radius, policy.pseudo_max_dn).map_err(|e| e.to_string())?;
        sum_a += fit.a;
        sum_b += fit.b;
    }
    let (mean_a, mean_b) = (sum_a / AC4_SEEDS as f64, sum_b / AC4_SEEDS as f64);
    check(
        rel(mean_a, a) <= AC4_NOISY_REL_TOL && rel(mean_b, b) <= AC4_NOISY_REL_TOL,
        || format!("noisy mean fit ({mean_a}, {mean_b}) over {AC4_SEEDS} seeds"),
    )?;
    let took = within_budget(start, AC4_BUDGET)?;
    Ok(format!(
        "noiseless ({:.3e}, {:.3e}) rel err, {} pseudo px max {worst_pseudo:.1e} after; \
         sigma={AC4_NOISE_SIGMA} mean ({mean_a:.4}, {mean_b:.4}) rel ({:.2}%, {:.2}%) on {n_pseudo} px; {took:?}",
        rel(m.a, a),
        rel(m.b, b),
        pseudo.count(),
        100.0 * rel(mean_a, a),
        100.0 * rel(mean_b, b),
    ))
}

fn ac5_ols_properties() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let noise = Normal::new(0.0, 5.0).expect("valid sigma");
    let xs: Vec<f64> = (0..AC5_POINTS).map(|_| rng.random_range(0.0..100.0)).collect();
    let ys: Vec<f64> = xs.iter().map(|x| 3.0 + 2.0 * x + noise.sample(&mut rng)).collect();
    let f = fit_ols(&xs, &ys).map_err(|e| e.to_string())?;
    let res_sum: f64 = f.residuals.iter().sum();
    let res_x: f64 = f.residuals.iter().zip(&xs).map(|(e, x)| e * x).sum();
    let abs_y: f64 = ys.iter().map(|y| y.abs()).sum();
    let abs_xy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x * y).abs()).sum();
    let (r1, r2) = (res_sum.abs() / abs_y, res_x.abs() / abs_xy);
    check(r1 <= AC5_ORTHO_REL_TOL, || format!("|sum e| / sum|y| = {r1:.2e}"))?;
    check(r2 <= AC5_ORTHO_REL_TOL, || format!("|sum e*x| / sum|x*y| = {r2:.2e}"))?;

    let mut worst_inv: f64 = 0.0;
    for trial in 0..200 {
        let n = rng.random_range(3..60);
        let slope = rng.random_range(0.5..5.0);
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-100.0..100.0)).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| rng.random_range(-50.0..50.0) + slope * x)
            .collect();
        let base = fit_ols(&xs, &ys).map_err(|e| e.to_string())?;

        let c = rng.random_range(-100.0..100.0);
        let shifted: Vec<f64> = ys.iter().map(|y| y + c).collect();
        let s = fit_ols(&xs, &shifted).map_err(|e| e.to_string())?;
        let e_slope = (s.slope - base.slope).abs() / base.slope.abs().max(1.0);
        let e_int = (s.intercept - base.intercept - c).abs() / (1.0 + base.intercept.abs() + c.abs());

        let k = rng.random_range(0.1..10.0);
        let scaled: Vec<f64> = xs.iter().map(|x| k * x).collect();
        let g = fit_ols(&scaled, &ys).map_err(|e| e.to_string())?;
        let e_kslope = (g.slope - base.slope / k).abs() / (base.slope / k).abs();
        let e_kint = (g.intercept - base.intercept).abs() / base.intercept.abs().max(1.0);

        let worst = e_slope.max(e_int).max(e_kslope).max(e_kint);
        check(worst <= AC5_INVARIANCE_REL_TOL, || {
            format!("trial {trial}: invariance error {worst:.2e}")
        })?;
        worst_inv = worst_inv.max(worst);

        let loss = |sl: f64, ic: f64| {
            let pred: Vec<f64> = xs.iter().map(|x| ic + sl * x).collect();
            mse(&ys, &pred).expect("same length")
        };
        let best = loss(base.slope, base.intercept);
        for (ds, di) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
            let p = loss(base.slope + ds * AC5_PERTURBATION, base.intercept + di * AC5_PERTURBATION);
            check(p >= best, || format!("trial {trial}: perturbed MSE {p} < {best}"))?;
        }
    }
    let took = within_budget(start, AC5_BUDGET)?;
    Ok(format!(
        "1e6 pts: sum e {r1:.1e}, sum e*x {r2:.1e}; 200 trials invariance worst {worst_inv:.1e}, MSE minimal; {took:?}"
    ))
}

fn run_cli(args: &[&str]) -> Result<std::process::Output, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ntlkit"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "ntlkit {} failed: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out)
}

fn dir_snapshot(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .map(|entry| {
            let entry = entry.map_err(|e| e.to_string())?;
            let bytes = std::fs::read(entry.path()).map_err(|e| e.to_string())?;
            Ok((entry.file_name().to_string_lossy().into_owned(), bytes))
        })
        .collect::<Result<_, String>>()?;
    files.sort();
    Ok(files)
}

fn ac6_format_determinism() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..AC6_GRIDS {
        let (ncols, nrows) = (rng.random_range(1..40), rng.random_range(1..40));
        let cells: Vec<f64> = (0..ncols * nrows)
            .map(|_| {
                if rng.random_bool(0.05) {
                    -9999.0
                } else {
                    rng.random_range(-5_000_000_000i64..5_000_000_000) as f64 / 1e6
                }
            })
            .collect();
        let g = Grid::new(ncols, nrows, cells, -9999.0).map_err(|e| e.to_string())?;
        let text = write_grid(&g);
        let back: Grid<f64> = read_grid(&text).map_err(|e| e.to_string())?;
        let same_bits = back
            .cells()
            .iter()
            .zip(g.cells())
            .all(|(x, y)| x.to_bits() == y.to_bits());
        check(same_bits && back.ncols() == ncols && back.nrows() == nrows, || {
            format!("grid {i} did not round-trip bit-exactly")
        })?;
        check(write_grid(&back) == text, || format!("grid {i} re-serialized differently"))?;
    }

    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/synthetic/config.json");
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (d1, d2) = (tmp.path().join("run1"), tmp.path().join("run2"));
    for d in [&d1, &d2] {
        run_cli(&["pipeline", "--config", config, "--out-dir", d.to_str().expect("utf-8 path")])?;
    }
    let (s1, s2) = (dir_snapshot(&d1)?, dir_snapshot(&d2)?);
    check(!s1.is_empty() && s1 == s2, || "pipeline reruns differ".to_string())?;
    let took = within_budget(start, AC6_BUDGET)?;
    Ok(format!(
        "{AC6_GRIDS} grids bit-exact; pipeline rerun identical across {} files; {took:?}",
        s1.len()
    ))
}

fn ac7_debloom_performance() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sources = isolated_sources(AC7_SIZE, AC7_SIZE, 2000, 6, 3, (12.0, 60.0), 7).map_err(|e| e.to_string())?;
    let truth: Grid<f64> = gen_scene(&SceneSpec {
        ncols: AC7_SIZE,
        nrows: AC7_SIZE,
        sources,
        background: 0.0,
        seed: 7,
    })
    .map_err(|e| e.to_string())?;
    let bloomed = forward_bloom_with_noise(&truth, 0.15, 0.1, 2, 0.02, rng.random())
        .map_err(|e| e.to_string())?;
    let input = tmp.path().join("big.asc");
    let output = tmp.path().join("big_debloomed.asc");
    std::fs::write(&input, write_grid(&bloomed)).map_err(|e| e.to_string())?;

    let start = Instant::now();
    let out = run_cli(&[
        "debloom",
        "--grid",
        input.to_str().expect("utf-8 path"),
        "--radius",
        &AC7_RADIUS.to_string(),
        "--out",
        output.to_str().expect("utf-8 path"),
    ])?;
    let took = within_budget(start, AC7_BUDGET)?;
    Ok(format!(
        "{AC7_SIZE}x{AC7_SIZE} radius {AC7_RADIUS} in {took:?} ({})",
        String::from_utf8_lossy(&out.stdout).trim()
    ))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("AC1", "MSE arithmetic vs published values", ac1_mse_arithmetic),
        ("AC2", "intercalibration recovery oracle", ac2_intercalibration_recovery),
        ("AC3", "desaturation recovery oracle", ac3_desaturation_recovery),
        ("AC4", "deblooming recovery oracle", ac4_deblooming_recovery),
        ("AC5", "OLS property suite", ac5_ols_properties),
        ("AC6", "format determinism", ac6_format_determinism),
        ("AC7", "debloom performance floor", ac7_debloom_performance),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS {id} {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {id} {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
