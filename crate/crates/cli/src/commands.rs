use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use chrono::NaiveDate;
use dailyproxy::gbt::Metrics;
use dailyproxy::ingest::{
    fetch_remote_ohlcv, ohlcv_to_series, read_csv_series, read_target_index, CsvSchema, TargetIndex,
};
use dailyproxy::intervals::{interval_table_csv, IntervalForecast, ResidualOffsets};
use dailyproxy::pipeline::{forecast_series, ForecastOutcome};
use dailyproxy::proxy::{ranking_table_csv, select_proxy, Selection};
use dailyproxy::series::{annualize, impute_raw, DataMatrix, TimeSeries};
use serde::{Deserialize, Serialize};

use crate::chart;
use crate::config::RunConfig;

pub const RANKING_CSV: &str = "ranking.csv";
pub const RANKING_JSON: &str = "ranking.json";
pub const METRICS_CSV: &str = "metrics.csv";
pub const METRICS_JSON: &str = "metrics.json";
pub const MODEL_JSON: &str = "model.json";
pub const SEARCH_JSON: &str = "search.json";
pub const FORECAST_CSV: &str = "forecast.csv";
pub const FORECAST_JSON: &str = "forecast.json";
pub const TEST_PREDICTIONS_CSV: &str = "test_predictions.csv";
pub const CHART_SVG: &str = "chart.svg";

/// Target and imputed candidates, ready for ranking or forecasting.
pub struct LoadedData {
    pub target: TargetIndex,
    pub candidates: Vec<TimeSeries>,
}

pub fn load_data(cfg: &RunConfig) -> Result<LoadedData> {
    let target = read_target_index(&cfg.data.target)?;
    let mut raw: Vec<TimeSeries> = Vec::new();
    for path in &cfg.data.candidates {
        raw.extend(read_csv_series(path, &CsvSchema::Wide)?);
    }
    for entry in &cfg.data.ohlcv_files {
        let (instrument, path) = entry
            .split_once('=')
            .ok_or_else(|| anyhow!("malformed ohlcv entry `{entry}`"))?;
        let schema = CsvSchema::Ohlcv {
            instrument: instrument.to_string(),
        };
        raw.extend(read_csv_series(path, &schema)?);
    }
    let endpoint = cfg.endpoint_config();
    for instrument in &cfg.data.remote_instruments {
        let records = fetch_remote_ohlcv(instrument, cfg.data.start, cfg.data.end, &endpoint)?;
        if records.is_empty() {
            log::warn!("{instrument}: endpoint returned no records");
            continue;
        }
        raw.extend(ohlcv_to_series(instrument, &records)?);
    }
    if let Some(catalog) = cfg.catalog()? {
        raw = catalog.select(raw);
    }
    let mut seen = BTreeSet::new();
    for s in &raw {
        if !seen.insert(s.id().to_string()) {
            return Err(dailyproxy::Error::Data(format!(
                "candidate id `{}` appears in more than one source",
                s.id()
            ))
            .into());
        }
    }
    if raw.is_empty() {
        return Err(dailyproxy::Error::Data("no candidate series loaded".into()).into());
    }
    let matrix = DataMatrix::from_series(&raw)?;
    let missing = matrix.missing_count();
    let candidates = if missing > 0 && cfg.impute.enabled {
        log::info!(
            "imputing {missing} missing cells across {} series x {} days",
            matrix.n_cols(),
            matrix.n_rows()
        );
        impute_raw(&matrix, &cfg.autoencoder())?.columns()?
    } else {
        matrix.columns()?
    };
    log::info!("loaded {} candidates", candidates.len());
    Ok(LoadedData { target, candidates })
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Serialize, Deserialize)]
struct RankingReport {
    target: String,
    target_years: Vec<i32>,
    warnings: Vec<String>,
    #[serde(flatten)]
    selection: Selection,
}

pub fn cmd_rank(cfg: &RunConfig, data: &LoadedData) -> Result<Selection> {
    let opts = cfg.selection()?;
    let annual = data
        .candidates
        .iter()
        .map(annualize)
        .collect::<dailyproxy::Result<Vec<_>>>()?;
    let selection = select_proxy(&data.target.series, &annual, &opts)?;
    for flag in &selection.flags {
        log::warn!("{}: {}", flag.candidate, flag.reason);
    }
    let report = RankingReport {
        target: data.target.series.id().to_string(),
        target_years: data.target.series.years().to_vec(),
        warnings: data.target.warnings.clone(),
        selection,
    };
    write(
        &cfg.out,
        RANKING_CSV,
        &ranking_table_csv(&report.selection.consensus)?,
    )?;
    write(&cfg.out, RANKING_JSON, &json(&report))?;
    log::info!(
        "proxy: {} (rank 1 under {} of {} measures)",
        report.selection.consensus.winner,
        report.selection.consensus.winner_top1_count(),
        report.selection.rankings.len()
    );
    Ok(report.selection)
}

/// Proxy named in the config, or the winner of an earlier ranking.
pub fn resolve_proxy(cfg: &RunConfig) -> Result<String> {
    if !cfg.data.proxy.is_empty() {
        return Ok(cfg.data.proxy.clone());
    }
    let path = cfg.out.join(RANKING_JSON);
    let text = std::fs::read_to_string(&path).map_err(|e| {
        dailyproxy::Error::Data(format!(
            "no proxy configured and {} is unreadable ({e}); run `rank` first or set --data.proxy",
            path.display()
        ))
    })?;
    let report: RankingReport = serde_json::from_str(&text)
        .map_err(|e| dailyproxy::Error::Data(format!("{}: {e}", path.display())))?;
    Ok(report.selection.consensus.winner)
}

#[derive(Serialize, Deserialize)]
struct MetricsReport {
    proxy: String,
    train: Metrics,
    test: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastRow {
    pub step: usize,
    pub date: NaiveDate,
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastReport {
    pub proxy: String,
    pub level: f64,
    pub inflation: f64,
    pub offsets: ResidualOffsets,
    pub rows: Vec<ForecastRow>,
}

fn metric(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.4}"))
}

fn metrics_csv(train: &Metrics, test: &Metrics) -> String {
    let mut out = String::from(",RMSE,MAE,R^2\n");
    for (name, m) in [("train", train), ("test", test)] {
        out.push_str(&format!(
            "{name},{:.4},{:.4},{}\n",
            m.rmse,
            m.mae,
            metric(m.r2)
        ));
    }
    out
}

pub fn cmd_forecast(cfg: &RunConfig, data: &LoadedData, proxy: &str) -> Result<ForecastOutcome> {
    let series = data
        .candidates
        .iter()
        .find(|s| s.id() == proxy)
        .ok_or_else(|| {
            dailyproxy::Error::Data(format!(
                "proxy series `{proxy}` is not among the loaded candidates"
            ))
        })?;
    let opts = cfg.forecast_options();
    let outcome = forecast_series(series, &opts)?;

    let out = &cfg.out;
    write(
        out,
        METRICS_CSV,
        &metrics_csv(&outcome.train_metrics, &outcome.test_metrics),
    )?;
    write(
        out,
        METRICS_JSON,
        &json(&MetricsReport {
            proxy: proxy.to_string(),
            train: outcome.train_metrics,
            test: outcome.test_metrics,
        }),
    )?;
    write(out, MODEL_JSON, &(outcome.model.to_json() + "\n"))?;
    write(out, SEARCH_JSON, &json(&outcome.search))?;
    write(
        out,
        FORECAST_CSV,
        &interval_table_csv(proxy, &outcome.intervals, opts.level),
    )?;
    let report = forecast_report(
        proxy,
        &outcome.intervals,
        &outcome.forecast_dates,
        outcome.offsets,
        opts.level,
        opts.inflation,
    );
    write(out, FORECAST_JSON, &json(&report))?;
    let mut preds = String::from("date,actual,predicted\n");
    for ((d, a), p) in outcome
        .test_dates
        .iter()
        .zip(&outcome.test_actual)
        .zip(&outcome.test_predicted)
    {
        preds.push_str(&format!("{d},{a:.4},{p:.4}\n"));
    }
    write(out, TEST_PREDICTIONS_CSV, &preds)?;
    log::info!(
        "{proxy}: test rmse {:.4}, mae {:.4}, r2 {}; {} forecast rows",
        outcome.test_metrics.rmse,
        outcome.test_metrics.mae,
        metric(outcome.test_metrics.r2),
        outcome.intervals.len()
    );
    Ok(outcome)
}

fn forecast_report(
    proxy: &str,
    intervals: &[IntervalForecast],
    dates: &[NaiveDate],
    offsets: ResidualOffsets,
    level: f64,
    inflation: f64,
) -> ForecastReport {
    ForecastReport {
        proxy: proxy.to_string(),
        level,
        inflation,
        offsets,
        rows: intervals
            .iter()
            .zip(dates)
            .map(|(r, d)| ForecastRow {
                step: r.step,
                date: *d,
                point: r.point,
                lower: r.lower,
                upper: r.upper,
            })
            .collect(),
    }
}

/// Test-window predictions as written by `forecast`.
pub struct TestWindow {
    pub dates: Vec<NaiveDate>,
    pub actual: Vec<f64>,
    pub predicted: Vec<f64>,
}

fn read_test_window(path: &Path) -> Result<TestWindow> {
    let text = std::fs::read_to_string(path)?;
    let mut window = TestWindow {
        dates: Vec::new(),
        actual: Vec::new(),
        predicted: Vec::new(),
    };
    for (i, line) in text.lines().enumerate().skip(1) {
        let bad =
            || dailyproxy::Error::Data(format!("{}: malformed line {}", path.display(), i + 1));
        let mut parts = line.split(',');
        let (Some(d), Some(a), Some(p), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(bad().into());
        };
        window.dates.push(d.parse().map_err(|_| bad())?);
        window.actual.push(a.parse().map_err(|_| bad())?);
        window.predicted.push(p.parse().map_err(|_| bad())?);
    }
    Ok(window)
}

/// Renders the chart from earlier `forecast` outputs. Returns the chart path,
/// or `None` when the test window is empty.
pub fn cmd_report(cfg: &RunConfig) -> Result<Option<PathBuf>> {
    let preds_path = cfg.out.join(TEST_PREDICTIONS_CSV);
    let fc_path = cfg.out.join(FORECAST_JSON);
    let missing: Vec<String> = [&preds_path, &fc_path]
        .iter()
        .filter(|p| !p.is_file())
        .map(|p| p.display().to_string())
        .collect();
    if !missing.is_empty() {
        return Err(dailyproxy::Error::Data(format!(
            "missing forecast outputs: {} (run `forecast` first)",
            missing.join(", ")
        ))
        .into());
    }
    let window = read_test_window(&preds_path)?;
    let report: ForecastReport = serde_json::from_str(&std::fs::read_to_string(&fc_path)?)
        .map_err(|e| dailyproxy::Error::Data(format!("{}: {e}", fc_path.display())))?;
    if window.dates.is_empty() {
        log::warn!("test window is empty; chart omitted");
        return Ok(None);
    }
    let svg = chart::render(&window, &report);
    write(&cfg.out, CHART_SVG, &svg)?;
    let path = cfg.out.join(CHART_SVG);
    log::info!("wrote {}", path.display());
    Ok(Some(path))
}

pub fn cmd_run(cfg: &RunConfig) -> Result<()> {
    let data = load_data(cfg)?;
    let selection = cmd_rank(cfg, &data)?;
    let proxy = if cfg.data.proxy.is_empty() {
        selection.consensus.winner.clone()
    } else {
        cfg.data.proxy.clone()
    };
    cmd_forecast(cfg, &data, &proxy)?;
    cmd_report(cfg)?;
    Ok(())
}
