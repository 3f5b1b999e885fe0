//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if a criterion fails for any reason other than a documented
//! scope limit.

#[path = "../../core/tests/oracles/mod.rs"]
mod oracles;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use dailyproxy::fixture::{self, PLANTED_PROXY};
use dailyproxy::gbt::{
    build_features, chrono_split, compute_metrics, fit_boosted_ensemble, grid_search, HyperGrid,
    HyperParams, SupervisedFrame,
};
use dailyproxy::intervals::{build_intervals, residual_quantiles};
use dailyproxy::pipeline::{forecast_series, ForecastOptions};
use dailyproxy::series::TimeSeries;
use dailyproxy::similarity::{
    dtw, edr, embed_as_trajectory, hausdorff, lcs_length, lcss_distance, soft_dtw, Method,
    PointSet2D, SimilarityConfig,
};
use dailyproxy_cli::commands;
use dailyproxy_cli::config;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const GRID: [f64; 5] = [-1.0, 0.0, 0.3, 1.0, 2.0];
const EPSILONS: [f64; 3] = [0.0, 0.3, 1.0];

enum Outcome {
    Pass(String),
    Fail(String),
    /// Every check that was run agreed, but the stated scope could not be
    /// covered within the stated budget.
    ScopeFail(String),
}

fn timed(budget: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let t = Instant::now();
    let out = f();
    let dt = t.elapsed();
    let within = dt <= budget;
    let note = |s: String| {
        format!(
            "{s} [{:.1}s, budget {}s]",
            dt.as_secs_f64(),
            budget.as_secs()
        )
    };
    match out {
        Outcome::Pass(s) if within => Outcome::Pass(note(s)),
        Outcome::Pass(s) => Outcome::Fail(note(format!("{s}; over time budget"))),
        Outcome::Fail(s) => Outcome::Fail(note(s)),
        Outcome::ScopeFail(s) => Outcome::ScopeFail(note(s)),
    }
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

fn fixture_config(out: &Path) -> config::RunConfig {
    let root = workspace_root();
    let fx = root.join(config::FIXTURE_DIR);
    let overrides = vec![
        ("offline".to_string(), "true".to_string()),
        ("out".to_string(), out.display().to_string()),
        (
            "data.target".to_string(),
            fx.join(fixture::TARGET_FILE).display().to_string(),
        ),
        (
            "data.candidates".to_string(),
            fx.join(fixture::CANDIDATES_FILE).display().to_string(),
        ),
        (
            "endpoint.cache_dir".to_string(),
            fx.join(fixture::CACHE_DIR).display().to_string(),
        ),
    ];
    config::load(None, &overrides).expect("fixture config is valid")
}

fn random_seq(rng: &mut ChaCha8Rng, min_len: usize, max_len: usize) -> Vec<f64> {
    let n = rng.random_range(min_len..=max_len);
    (0..n).map(|_| rng.random_range(-2.0..2.0)).collect()
}

fn check_pair(
    t: &oracles::Tables,
    x: &[f64],
    y: &[f64],
    full: &SimilarityConfig,
) -> Option<String> {
    let got = dtw(x, y, full).unwrap();
    let want = t.dtw(x, y);
    if (got - want).abs() > 1e-9 {
        return Some(format!("dtw {x:?} {y:?}: {got} vs {want}"));
    }
    for eps in EPSILONS {
        let (got, want) = (lcs_length(x, y, eps), t.lcs(x, y, eps));
        if got != want {
            return Some(format!("lcs eps={eps} {x:?} {y:?}: {got} vs {want}"));
        }
        let (got, want) = (edr(x, y, eps), oracles::edr_brute(x, y, eps));
        if got != want {
            return Some(format!("edr eps={eps} {x:?} {y:?}: {got} vs {want}"));
        }
    }
    None
}

/// Exhaustive over every grid pair up to length 4, then a seeded sample of
/// grid pairs with at least one side of length 5 or 6. Covering every pair up
/// to length 6 would mean 19 530^2 (about 3.8e8) enumerations of up to 1683
/// warping paths each.
fn criterion_1() -> Outcome {
    let t = oracles::Tables::new(6);
    let full = SimilarityConfig::default();
    let short = oracles::grid_sequences(&GRID, 4);
    let mut checked = 0usize;
    for x in &short {
        for y in &short {
            if let Some(msg) = check_pair(&t, x, y, &full) {
                return Outcome::Fail(msg);
            }
            checked += 1;
        }
    }
    let exhaustive = checked;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let grid_seq = |rng: &mut ChaCha8Rng, len: usize| -> Vec<f64> {
        (0..len)
            .map(|_| GRID[rng.random_range(0..GRID.len())])
            .collect()
    };
    let sampled = 300_000;
    for _ in 0..sampled {
        let m = rng.random_range(5..=6);
        let n = rng.random_range(1..=6);
        let (x, y) = (grid_seq(&mut rng, m), grid_seq(&mut rng, n));
        let (x, y) = if rng.random_bool(0.5) { (x, y) } else { (y, x) };
        if let Some(msg) = check_pair(&t, &x, &y, &full) {
            return Outcome::Fail(msg);
        }
        checked += 1;
    }
    let total: u64 = (1..=6).map(|l| 5u64.pow(l)).sum();
    Outcome::ScopeFail(format!(
        "0 mismatches over {checked} pairs ({exhaustive} exhaustive up to length 4, \
         {sampled} sampled with a side of length 5-6, eps {EPSILONS:?}); \
         the stated scope is all {} pairs up to length 6",
        total * total
    ))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let gammas = [1e-4, 1e-2, 1.0, 10.0];
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let x = random_seq(&mut rng, 1, 10);
        let y = random_seq(&mut rng, 1, 10);
        let d = dtw(&x, &y, &SimilarityConfig::default()).unwrap();
        let soft: Vec<f64> = gammas
            .iter()
            .map(|&gamma| {
                let cfg = SimilarityConfig {
                    gamma,
                    ..SimilarityConfig::default()
                };
                soft_dtw(&x, &y, &cfg).unwrap()
            })
            .collect();
        worst = worst.max((soft[0] - d).abs());
        if (soft[0] - d).abs() > 1e-2 {
            return Outcome::Fail(format!(
                "soft_dtw(1e-4) {} vs dtw {d} on {x:?} {y:?}",
                soft[0]
            ));
        }
        if soft.windows(2).any(|w| w[1] > w[0]) {
            return Outcome::Fail(format!(
                "soft_dtw increases in gamma on {x:?} {y:?}: {soft:?}"
            ));
        }
    }
    Outcome::Pass(format!(
        "100 pairs; max |soft_dtw(1e-4) - dtw| = {worst:.2e}; monotone in gamma"
    ))
}

fn random_points(rng: &mut ChaCha8Rng) -> PointSet2D {
    let n = rng.random_range(1..=8);
    PointSet2D::new(
        (0..n)
            .map(|_| (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)))
            .collect(),
    )
    .unwrap()
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = SimilarityConfig::default();
    for _ in 0..200 {
        let x = random_seq(&mut rng, 2, 12);
        let y = random_seq(&mut rng, 2, 12);
        for m in Method::STANDARD {
            let (a, b) = (
                m.distance(&x, &y, &cfg).unwrap(),
                m.distance(&y, &x, &cfg).unwrap(),
            );
            if a != b {
                return Outcome::Fail(format!(
                    "{} not symmetric on {x:?} {y:?}: {a} vs {b}",
                    m.id()
                ));
            }
        }
        let identity = [
            ("edr", edr(&x, &x, 0.5) as f64),
            ("lcss eps=0", lcss_distance(&x, &x, 0.0).unwrap()),
            ("lcss eps=1", lcss_distance(&x, &x, 1.0).unwrap()),
            ("dtw", dtw(&x, &x, &cfg).unwrap()),
            (
                "hausdorff",
                hausdorff(
                    &embed_as_trajectory(&x).unwrap(),
                    &embed_as_trajectory(&x).unwrap(),
                )
                .unwrap(),
            ),
        ];
        if let Some((name, d)) = identity.iter().find(|(_, d)| *d != 0.0) {
            return Outcome::Fail(format!("{name}(x, x) = {d} on {x:?}"));
        }
    }
    for _ in 0..100 {
        let (a, b, c) = (
            random_points(&mut rng),
            random_points(&mut rng),
            random_points(&mut rng),
        );
        let ac = hausdorff(&a, &c).unwrap();
        let bound = hausdorff(&a, &b).unwrap() + hausdorff(&b, &c).unwrap();
        if ac > bound + 1e-12 {
            return Outcome::Fail(format!("triangle inequality: {ac} > {bound}"));
        }
    }
    Outcome::Pass("symmetry on 200 pairs x 5 measures, identities, 100 triangle triples".into())
}

fn criterion_4() -> Outcome {
    let out = tempfile::tempdir().unwrap();
    let cfg = fixture_config(out.path());
    let data = match commands::load_data(&cfg) {
        Ok(d) => d,
        Err(e) => return Outcome::Fail(format!("loading fixture: {e:#}")),
    };
    if data.candidates.len() != 20 {
        return Outcome::Fail(format!(
            "fixture has {} candidates, expected 20",
            data.candidates.len()
        ));
    }
    let selection = match commands::cmd_rank(&cfg, &data) {
        Ok(s) => s,
        Err(e) => return Outcome::Fail(format!("rank: {e:#}")),
    };
    let c = &selection.consensus;
    let top1 = c.winner_top1_count();
    let msg = format!("winner {} with rank 1 under {top1} of 5 measures", c.winner);
    if c.winner == PLANTED_PROXY && top1 >= 4 {
        Outcome::Pass(msg)
    } else {
        Outcome::Fail(msg)
    }
}

fn monotone(rmse: &[f64]) -> bool {
    rmse.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12))
}

fn sin_frame(n: usize, seed: u64) -> SupervisedFrame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let lag1: Vec<f64> = (0..n)
        .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
        .collect();
    let y = lag1
        .iter()
        .map(|x| x.sin() + 0.1 * noise.sample(&mut rng))
        .collect();
    let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
    let dates = (0..n)
        .map(|i| start + chrono::Days::new(i as u64))
        .collect();
    SupervisedFrame::new(vec!["lag_1".into()], lag1, y, dates).unwrap()
}

fn criterion_5() -> Outcome {
    // Per-round training loss on several fixtures and settings.
    let mut fits = 0;
    for seed in 0..4u64 {
        let frame = sin_frame(300, 100 + seed);
        for (depth, eta, lambda, alpha) in [
            (0, 0.3, 1.0, 0.0),
            (2, 0.1, 1.0, 0.5),
            (5, 0.3, 0.0, 0.0),
            (3, 1.0, 5.0, 2.0),
        ] {
            let hp = HyperParams {
                rounds: 40,
                max_depth: depth,
                learning_rate: eta,
                lambda,
                alpha,
                ..HyperParams::default()
            };
            let m = match fit_boosted_ensemble(&frame, &hp, seed) {
                Ok(m) => m,
                Err(e) => return Outcome::Fail(format!("fit: {e}")),
            };
            if !monotone(&m.trace.rmse) {
                return Outcome::Fail(format!("training rmse increased: {:?}", m.trace.rmse));
            }
            fits += 1;
        }
    }

    // Closed-form single leaf on three points: base + sum(y - base) / (n + lambda).
    let ys = [2.0, 4.0, 0.0];
    let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
    let three = SupervisedFrame::new(
        vec!["x".into()],
        vec![0.0, 1.0, 2.0],
        ys.to_vec(),
        (0..3).map(|i| start + chrono::Days::new(i)).collect(),
    )
    .unwrap();
    let (base, lambda) = (1.0, 2.0);
    let hp = HyperParams {
        rounds: 1,
        max_depth: 0,
        learning_rate: 1.0,
        lambda,
        base_score: Some(base),
        ..HyperParams::default()
    };
    let m = fit_boosted_ensemble(&three, &hp, 0).unwrap();
    let expected = base + ys.iter().map(|y| y - base).sum::<f64>() / (3.0 + lambda);
    for x in [-3.0, 0.5, 2.0, 10.0] {
        let got = m.predict_row(&[x]).unwrap();
        if got != expected {
            return Outcome::Fail(format!("depth-0 leaf: {got} vs {expected}"));
        }
    }

    let frame = sin_frame(500, 42);
    let (train, test) = chrono_split(&frame, 0.8).unwrap();
    let search = match grid_search(&train, &HyperGrid::default().expand(), 3, 42) {
        Ok(s) => s,
        Err(e) => return Outcome::Fail(format!("grid search: {e}")),
    };
    let model = fit_boosted_ensemble(&train, &search.best, 42).unwrap();
    if !monotone(&model.trace.rmse) {
        return Outcome::Fail("training rmse increased on the sine fixture".into());
    }
    let pred = model.predict_frame(&test).unwrap();
    let r2 = compute_metrics(&test.targets, &pred).unwrap().r2.unwrap();
    let msg = format!(
        "{} monotone fits, closed-form leaf {expected}, sine test R^2 {r2:.4} (rounds {}, depth {}, eta {})",
        fits + 1,
        search.best.rounds,
        search.best.max_depth,
        search.best.learning_rate
    );
    if r2 >= 0.85 {
        Outcome::Pass(msg)
    } else {
        Outcome::Fail(msg)
    }
}

fn criterion_6() -> Outcome {
    let actual = [3.0, -1.0, 4.0, 1.5, 9.0, 2.0];
    let same = compute_metrics(&actual, &actual).unwrap();
    if (same.rmse, same.mae, same.r2) != (0.0, 0.0, Some(1.0)) {
        return Outcome::Fail(format!("perfect prediction: {same:?}"));
    }
    let shifted: Vec<f64> = actual.iter().map(|a| a + 1.0).collect();
    let off = compute_metrics(&actual, &shifted).unwrap();
    if (off.rmse, off.mae) != (1.0, 1.0) {
        return Outcome::Fail(format!("unit offset: {off:?}"));
    }
    let mean = actual.iter().sum::<f64>() / actual.len() as f64;
    let flat = compute_metrics(&actual, &[mean; 6]).unwrap();
    if flat.r2 != Some(0.0) {
        return Outcome::Fail(format!("mean prediction: {flat:?}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..1000 {
        let n = rng.random_range(1..=60);
        let scale = 10f64.powi(rng.random_range(-3..=4));
        let a: Vec<f64> = (0..n)
            .map(|_| scale * rng.random_range(-1.0..1.0))
            .collect();
        let p: Vec<f64> = (0..n)
            .map(|_| scale * rng.random_range(-1.0..1.0))
            .collect();
        let m = compute_metrics(&a, &p).unwrap();
        if m.rmse < m.mae {
            return Outcome::Fail(format!("rmse {} < mae {}", m.rmse, m.mae));
        }
    }
    Outcome::Pass("three identities exact; rmse >= mae on 1000 random vectors".into())
}

fn ar1(n: usize, phi: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut prev = 0.0;
    (0..n)
        .map(|_| {
            prev = phi * prev + noise.sample(&mut rng);
            10.0 + prev
        })
        .collect()
}

fn contains(
    wide: &[dailyproxy::intervals::IntervalForecast],
    narrow: &[dailyproxy::intervals::IntervalForecast],
) -> bool {
    wide.iter()
        .zip(narrow)
        .all(|(w, n)| w.lower <= n.lower && n.upper <= w.upper)
}

fn criterion_7() -> Outcome {
    // kappa monotonicity on random offsets and on offsets fitted to residuals.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let points: Vec<f64> = (0..15).map(|_| rng.random_range(-1e4..1e4)).collect();
        let res: Vec<f64> = (0..rng.random_range(10..200))
            .map(|_| rng.random_range(-50.0..80.0))
            .collect();
        let offsets = residual_quantiles(&res, &vec![0.0; res.len()], 0.95).unwrap();
        let one = build_intervals(&points, offsets, 1.0, 0.95).unwrap();
        let two = build_intervals(&points, offsets, 2.0, 0.95).unwrap();
        if !contains(&two, &one) {
            return Outcome::Fail(format!("kappa 2 does not contain kappa 1 for {offsets:?}"));
        }
    }

    let values = ar1(1500, 0.7, 42);
    let fit_len = 1200;
    let start = NaiveDate::from_ymd_opt(2015, 1, 1).unwrap();
    let fit = TimeSeries::daily("ar1", start, values[..fit_len].to_vec()).unwrap();
    let opts = ForecastOptions {
        inflation: 1.0,
        ..ForecastOptions::default()
    };
    let out = match forecast_series(&fit, &opts) {
        Ok(o) => o,
        Err(e) => return Outcome::Fail(format!("pipeline: {e}")),
    };
    let wide = build_intervals(
        &out.intervals.iter().map(|r| r.point).collect::<Vec<_>>(),
        out.offsets,
        2.0,
        0.95,
    )
    .unwrap();
    if !contains(&wide, &out.intervals) {
        return Outcome::Fail("kappa 2 does not contain kappa 1 on the AR(1) forecast".into());
    }

    // One-step intervals rolled over every point after the fitting window.
    let params = out.model.normalization.unwrap();
    let scaled = TimeSeries::daily(
        "ar1",
        start,
        values.iter().map(|&v| params.apply(v)).collect(),
    )
    .unwrap();
    let frame = build_features(&scaled, &opts.features).unwrap();
    let first_new = frame
        .dates
        .iter()
        .position(|d| *d > fit.last_date())
        .unwrap();
    let offset = opts.features.history_needed();
    let mut hits = 0;
    for i in first_new..frame.len() {
        let point = params.invert(out.model.predict_row(frame.row(i)).unwrap());
        let row = build_intervals(&[point], out.offsets, 1.0, 0.95).unwrap()[0];
        let actual = values[offset + i];
        if row.lower <= actual && actual <= row.upper {
            hits += 1;
        }
    }
    let evals = frame.len() - first_new;
    let coverage = hits as f64 / evals as f64;
    let msg = format!(
        "kappa containment on 201 fixtures; AR(1) coverage {coverage:.4} over {evals} evaluations"
    );
    if evals >= 200 && (0.88..=0.99).contains(&coverage) {
        Outcome::Pass(msg)
    } else {
        Outcome::Fail(msg)
    }
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_default()
}

/// Runs the in-process pipeline, then the binary with the same settings, and
/// compares every report byte for byte. Returns (criterion 8, criterion 9).
fn criteria_8_and_9() -> (Outcome, Outcome) {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = fixture_config(a.path());
    let in_process = commands::cmd_run(&cfg);

    let root = workspace_root();
    let t = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_dailyproxy"))
        .current_dir(&root)
        .env_remove("RUST_LOG")
        .args(["run", "--offline", "--out"])
        .arg(b.path())
        .status()
        .expect("spawn dailyproxy");
    let elapsed = t.elapsed();

    let c9 = {
        let code = status.code().unwrap_or(-1);
        let msg = format!(
            "`dailyproxy run --offline` exit {code} in {:.1}s (budget 300s)",
            elapsed.as_secs_f64()
        );
        if code == 0
            && elapsed < Duration::from_secs(300)
            && b.path().join(commands::CHART_SVG).is_file()
        {
            Outcome::Pass(msg)
        } else {
            Outcome::Fail(msg)
        }
    };

    let c8 = (|| {
        if let Err(e) = in_process {
            return Outcome::Fail(format!("in-process run: {e:#}"));
        }
        let fc = read(a.path(), commands::FORECAST_CSV);
        let lines: Vec<&str> = fc.lines().collect();
        let header =
            format!("step,Predicted_{PLANTED_PROXY},Adjusted_CI_Lower_95%,Adjusted_CI_Upper_95%");
        if lines.first() != Some(&header.as_str()) || lines.len() != 16 {
            return Outcome::Fail(format!(
                "forecast.csv header {:?}, {} data rows",
                lines.first(),
                lines.len().saturating_sub(1)
            ));
        }
        let rank = read(a.path(), commands::RANKING_CSV);
        let rows: Vec<Vec<&str>> = rank.lines().map(|l| l.split(',').collect()).collect();
        if rows.len() != 1 + cfg.similarity.k || rows.iter().any(|r| r.len() != 5) {
            return Outcome::Fail(format!(
                "ranking.csv shape: {} lines, widths {:?}",
                rows.len(),
                rows.iter().map(Vec::len).collect::<Vec<_>>()
            ));
        }
        let mut names: Vec<String> = std::fs::read_dir(a.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        names.sort();
        for name in &names {
            let (x, y) = (
                std::fs::read(a.path().join(name)).unwrap(),
                std::fs::read(b.path().join(name)).unwrap_or_default(),
            );
            if x != y {
                return Outcome::Fail(format!("{name} differs between reruns"));
            }
        }
        Outcome::Pass(format!(
            "15 forecast rows with verbatim headers; ranking table 5 x {}; {} report files byte-identical across reruns",
            cfg.similarity.k,
            names.len()
        ))
    })();
    (c8, c9)
}

/// Number, name, time budget in seconds, check.
type Criterion = (u8, &'static str, u64, fn() -> Outcome);

fn main() {
    let timed_criteria: [Criterion; 7] = [
        (1, "similarity oracle equivalence", 60, criterion_1),
        (2, "soft-dtw consistency", 60, criterion_2),
        (3, "metric axioms", 60, criterion_3),
        (4, "planted-proxy recovery", 10, criterion_4),
        (5, "boosting correctness", 60, criterion_5),
        (6, "metrics identities", 60, criterion_6),
        (7, "interval behavior", 120, criterion_7),
    ];
    let mut results: Vec<(u8, &str, Outcome)> = timed_criteria
        .into_iter()
        .map(|(n, name, secs, f)| (n, name, timed(Duration::from_secs(secs), f)))
        .collect();
    let (c8, c9) = criteria_8_and_9();
    results.push((8, "report fidelity", c8));
    results.push((9, "pipeline end-to-end", c9));

    let mut hard_failures = 0;
    println!();
    for (n, name, outcome) in &results {
        match outcome {
            Outcome::Pass(s) => println!("criterion {n} ({name}): PASS - {s}"),
            Outcome::ScopeFail(s) => println!("criterion {n} ({name}): FAIL (scope) - {s}"),
            Outcome::Fail(s) => {
                hard_failures += 1;
                println!("criterion {n} ({name}): FAIL - {s}");
            }
        }
    }
    if hard_failures > 0 {
        std::process::exit(1);
    }
}
