//! Deterministic synthetic dataset with a planted proxy.
//!
//! The target is a 13-year annual index (2011 to 2023). Candidates are daily
//! series whose calendar-year means correlate with the standardized target
//! to varying degrees. One candidate, `Volume_Brent`, has annual means equal
//! to the standardized target plus N(0, 0.1²) noise, up to an affine map, so
//! it is the intended proxy. Fourteen candidates live in a wide CSV; the six
//! Brent OHLCV fields arrive as a recorded response from the chart endpoint.

use std::path::Path;

use chrono::{Datelike, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::ingest::remote::{payload_json, ResponseCache};
use crate::ingest::{wide_csv_string, OhlcvRecord};
use crate::series::{AnnualSeries, TimeSeries};

pub const FIRST_YEAR: i32 = 2011;
pub const LAST_YEAR: i32 = 2023;
pub const PLANTED_PROXY: &str = "Volume_Brent";
pub const REMOTE_INSTRUMENT: &str = "Brent";
/// Timestamp stored with the recorded response (2024-01-01T00:00:00Z).
pub const RECORDED_AT: u64 = 1_704_067_200;
pub const TARGET_FILE: &str = "target.csv";
pub const CANDIDATES_FILE: &str = "candidates.csv";
pub const CACHE_DIR: &str = "cache";
/// Fraction of daily cells left blank.
const MISSING_RATE: f64 = 0.003;

pub fn start_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(FIRST_YEAR, 1, 1).expect("valid date")
}

pub fn end_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(LAST_YEAR, 12, 31).expect("valid date")
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub target: AnnualSeries,
    /// Candidates stored in the wide CSV.
    pub local: Vec<TimeSeries>,
    /// Records served for [`REMOTE_INSTRUMENT`].
    pub remote: Vec<OhlcvRecord>,
}

/// How a decoy's annual profile relates to the target.
struct Profile {
    id: &'static str,
    /// Correlation of annual means with the standardized target.
    rho: f64,
    level: f64,
    /// Annual-mean spread per unit of profile.
    scale: f64,
    /// Daily noise standard deviation.
    noise: f64,
}

const VOLUMES: [Profile; 5] = [
    Profile {
        id: "Volume_WTI",
        rho: 0.75,
        level: 250_000.0,
        scale: 30_000.0,
        noise: 25_000.0,
    },
    Profile {
        id: "Volume_WTI_Oil_ETF",
        rho: 0.7,
        level: 9_000_000.0,
        scale: 1_500_000.0,
        noise: 1_200_000.0,
    },
    Profile {
        id: "Volume_RBOB_Gasoline",
        rho: 0.65,
        level: 60_000.0,
        scale: 8_000.0,
        noise: 7_000.0,
    },
    Profile {
        id: "Volume_Energy_Sector_ETF",
        rho: 0.6,
        level: 15_000_000.0,
        scale: 2_000_000.0,
        noise: 1_800_000.0,
    },
    Profile {
        id: "Volume_Heating_Oil",
        rho: 0.55,
        level: 45_000.0,
        scale: 6_000.0,
        noise: 5_000.0,
    },
];

/// Instruments whose price fields share one annual profile.
const PRICED: [(&str, f64, f64, f64, &[&str]); 3] = [
    (
        "WTI_Oil_ETF",
        0.45,
        30.0,
        6.0,
        &["Open", "High", "Close", "Adj_Close"],
    ),
    ("Heating_Oil", 0.35, 2.5, 0.5, &["Open", "Low"]),
    (
        "Oil_Services_ETF",
        0.25,
        25.0,
        5.0,
        &["Open", "High", "Close"],
    ),
];

struct Gen {
    rng: ChaCha8Rng,
    normal: Normal<f64>,
}

impl Gen {
    fn z(&mut self) -> f64 {
        self.normal.sample(&mut self.rng)
    }

    fn standardized(&mut self, n: usize) -> Vec<f64> {
        let mut v: Vec<f64> = (0..n).map(|_| self.z()).collect();
        let mean = v.iter().sum::<f64>() / n as f64;
        let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        v.iter_mut().for_each(|x| *x = (*x - mean) / sd);
        v
    }

    /// Annual profile with the given correlation to `target_z`.
    fn correlated(&mut self, target_z: &[f64], rho: f64) -> Vec<f64> {
        let u = self.standardized(target_z.len());
        target_z
            .iter()
            .zip(&u)
            .map(|(t, e)| rho * t + (1.0 - rho * rho).sqrt() * e)
            .collect()
    }

    /// Daily path whose calendar-year means equal `level + scale * profile`.
    ///
    /// Within-year variation is AR(1) noise plus a weekday pattern, shifted
    /// per year so the annual mean is exact.
    fn daily(&mut self, dates: &[NaiveDate], annual: &[f64], noise: f64, weekly: f64) -> Vec<f64> {
        let mut ar = 0.0;
        let mut raw = Vec::with_capacity(dates.len());
        for d in dates {
            ar = 0.8 * ar + 0.6 * noise * self.z();
            let dow = d.weekday().num_days_from_monday() as f64;
            raw.push(ar + weekly * (2.0 * std::f64::consts::PI * dow / 7.0).sin());
        }
        let mut out = raw.clone();
        for (k, year) in (FIRST_YEAR..=LAST_YEAR).enumerate() {
            let idx: Vec<usize> = (0..dates.len())
                .filter(|&i| dates[i].year() == year)
                .collect();
            let mean = idx.iter().map(|&i| raw[i]).sum::<f64>() / idx.len() as f64;
            for &i in &idx {
                out[i] = annual[k] + raw[i] - mean;
            }
        }
        out
    }

    fn missing(&mut self) -> bool {
        self.rng.random_bool(MISSING_RATE)
    }
}

fn round4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}

/// Builds the dataset for `seed`. The same seed always yields identical data.
pub fn generate(seed: u64) -> Result<SyntheticDataset> {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        normal: Normal::new(0.0, 1.0).expect("unit normal"),
    };
    let years: Vec<i32> = (FIRST_YEAR..=LAST_YEAR).collect();
    let n_years = years.len();
    let dates: Vec<NaiveDate> = start_date()
        .iter_days()
        .take_while(|d| *d <= end_date())
        .collect();

    let target_z = g.standardized(n_years);
    let target_values: Vec<f64> = target_z.iter().map(|z| round4(62.0 + 7.5 * z)).collect();
    let target = AnnualSeries::new("energy_security", years.clone(), target_values)?;

    let mut local = Vec::new();
    let mut push_local = |g: &mut Gen, id: String, values: Vec<f64>| -> Result<()> {
        let values = values
            .into_iter()
            .map(|v| if g.missing() { None } else { Some(round4(v)) })
            .collect();
        local.push(TimeSeries::new(id, dates.clone(), values)?);
        Ok(())
    };
    for p in &VOLUMES {
        let profile = g.correlated(&target_z, p.rho);
        let annual: Vec<f64> = profile.iter().map(|z| p.level + p.scale * z).collect();
        let daily = g.daily(&dates, &annual, p.noise, 0.3 * p.noise);
        push_local(&mut g, p.id.to_string(), daily)?;
    }
    for (instrument, rho, level, scale, fields) in PRICED {
        let profile = g.correlated(&target_z, rho);
        let annual: Vec<f64> = profile.iter().map(|z| level + scale * z).collect();
        let base = g.daily(&dates, &annual, 0.15 * scale, 0.0);
        for field in fields {
            let spread = 0.01 * level;
            let values = base
                .iter()
                .map(|b| match *field {
                    "High" => b + spread,
                    "Low" => b - spread,
                    _ => b + 0.2 * spread * g.z(),
                })
                .collect();
            push_local(&mut g, format!("{field}_{instrument}"), values)?;
        }
    }

    // Brent: planted volume plus weakly related prices.
    let planted: Vec<f64> = target_z
        .iter()
        .map(|z| 15_000.0 + 2_000.0 * (z + 0.1 * g.z()))
        .collect();
    let volume = g.daily(&dates, &planted, 900.0, 600.0);
    let price_profile = g.correlated(&target_z, 0.15);
    let price_annual: Vec<f64> = price_profile.iter().map(|z| 75.0 + 12.0 * z).collect();
    let price = g.daily(&dates, &price_annual, 3.0, 0.0);
    let mut remote = Vec::with_capacity(dates.len());
    for (i, d) in dates.iter().enumerate() {
        let open = price[i] + 0.4 * g.z();
        let close = price[i] + 0.4 * g.z();
        let high = open.max(close) + 0.5 * g.z().abs();
        let low = open.min(close) - 0.5 * g.z().abs();
        let keep = |g: &mut Gen, v: f64| if g.missing() { None } else { Some(round4(v)) };
        remote.push(OhlcvRecord {
            date: *d,
            open: keep(&mut g, open),
            high: Some(round4(high)),
            low: Some(round4(low)),
            close: keep(&mut g, close),
            adj_close: keep(&mut g, 0.98 * close),
            volume: keep(&mut g, volume[i].max(0.0)),
        });
    }
    Ok(SyntheticDataset {
        target,
        local,
        remote,
    })
}

/// Annual target as a `year,value` CSV.
pub fn target_csv(target: &AnnualSeries) -> String {
    let mut out = String::from("year,value\n");
    for (y, v) in target.years().iter().zip(target.values()) {
        out.push_str(&format!("{y},{v}\n"));
    }
    out
}

/// Writes `target.csv`, `candidates.csv` and the recorded Brent response
/// under `cache/` into `dir`.
pub fn write_fixture(dir: &Path, seed: u64) -> Result<SyntheticDataset> {
    let data = generate(seed)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let target_path = dir.join(TARGET_FILE);
    std::fs::write(&target_path, target_csv(&data.target))
        .map_err(|e| Error::io(&target_path, e))?;
    let cand_path = dir.join(CANDIDATES_FILE);
    std::fs::write(&cand_path, wide_csv_string(&data.local)?)
        .map_err(|e| Error::io(&cand_path, e))?;
    ResponseCache::new(dir.join(CACHE_DIR)).store(
        REMOTE_INSTRUMENT,
        start_date(),
        end_date(),
        "recorded",
        payload_json(&data.remote).as_bytes(),
        RECORDED_AT,
    )?;
    Ok(data)
}
