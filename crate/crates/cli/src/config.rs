//! Run configuration: TOML file with sections, environment and flag overrides.
//!
//! Precedence, lowest first: built-in defaults, the `--config` file,
//! `DAILYPROXY_*` environment variables for the endpoint, then flags.
//! Every key has a flag of the same dotted name, e.g. `--similarity.epsilon`.
//! Relative paths in a config file resolve against the file's directory.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use dailyproxy::gbt::{FeatureSpec, HyperGrid};
use dailyproxy::ingest::{CandidateCatalog, EndpointConfig};
use dailyproxy::pipeline::ForecastOptions;
use dailyproxy::proxy::SelectionOptions;
use dailyproxy::series::AutoencoderConfig;
use dailyproxy::similarity::{Method, SimilarityConfig};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn config_err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub offline: bool,
    pub data: DataConfig,
    pub endpoint: EndpointSection,
    pub impute: ImputeConfig,
    pub similarity: SimilaritySection,
    pub features: FeatureSpec,
    pub model: ModelConfig,
    pub forecast: ForecastSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// `year,value` CSV of the annual target.
    pub target: PathBuf,
    /// Wide CSV files of daily candidates.
    pub candidates: Vec<PathBuf>,
    /// OHLCV CSV files as `Instrument=path`.
    pub ohlcv_files: Vec<String>,
    /// Instruments fetched from the chart endpoint.
    pub remote_instruments: Vec<String>,
    /// Candidate ids (`<Field>_<Instrument>`) to keep; empty keeps every
    /// loaded series.
    pub catalog: Vec<String>,
    pub start: NaiveDate,
    pub end: NaiveDate,
    /// Series to forecast; empty means the winner in `ranking.json`.
    pub proxy: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EndpointSection {
    pub url_template: String,
    pub cache_dir: PathBuf,
    pub ttl_hours: f64,
    pub timeout_secs: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImputeConfig {
    pub enabled: bool,
    /// Hidden width; 0 picks half the number of series, rounded up.
    pub hidden: usize,
    pub learning_rate: f64,
    pub epochs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimilaritySection {
    pub methods: Vec<String>,
    pub epsilon: f64,
    pub gamma: f64,
    /// Sakoe-Chiba band for DTW and Soft-DTW; negative means unrestricted.
    pub band: i64,
    pub k: usize,
    pub normalize: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub train_fraction: f64,
    pub folds: usize,
    pub normalize: bool,
    pub rounds: Vec<usize>,
    pub max_depth: Vec<usize>,
    pub learning_rate: Vec<f64>,
    pub lambda: Vec<f64>,
    pub alpha: Vec<f64>,
    pub gamma: Vec<f64>,
    pub min_child_weight: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForecastSection {
    pub horizon: usize,
    pub level: f64,
    pub inflation: f64,
}

pub const FIXTURE_DIR: &str = "fixtures/synthetic";

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            out: PathBuf::from("out"),
            offline: false,
            data: DataConfig::default(),
            endpoint: EndpointSection::default(),
            impute: ImputeConfig::default(),
            similarity: SimilaritySection::default(),
            features: FeatureSpec::default(),
            model: ModelConfig::default(),
            forecast: ForecastSection::default(),
        }
    }
}

impl Default for DataConfig {
    fn default() -> Self {
        let dir = Path::new(FIXTURE_DIR);
        Self {
            target: dir.join("target.csv"),
            candidates: vec![dir.join("candidates.csv")],
            ohlcv_files: Vec::new(),
            remote_instruments: vec!["Brent".into()],
            catalog: Vec::new(),
            start: NaiveDate::from_ymd_opt(2011, 1, 1).expect("valid date"),
            end: NaiveDate::from_ymd_opt(2023, 12, 31).expect("valid date"),
            proxy: String::new(),
        }
    }
}

impl Default for EndpointSection {
    fn default() -> Self {
        let e = EndpointConfig::default();
        Self {
            url_template: e.url_template,
            cache_dir: Path::new(FIXTURE_DIR).join("cache"),
            ttl_hours: e.ttl_hours,
            timeout_secs: e.timeout_secs,
        }
    }
}

impl Default for ImputeConfig {
    fn default() -> Self {
        let a = AutoencoderConfig::default();
        Self {
            enabled: true,
            hidden: 0,
            learning_rate: a.learning_rate,
            epochs: a.epochs,
        }
    }
}

impl Default for SimilaritySection {
    fn default() -> Self {
        let s = SimilarityConfig::default();
        Self {
            methods: Method::STANDARD
                .iter()
                .map(|m| m.id().to_string())
                .collect(),
            epsilon: s.epsilon,
            gamma: s.gamma,
            band: -1,
            k: 5,
            normalize: true,
        }
    }
}

impl Default for ModelConfig {
    fn default() -> Self {
        let g = HyperGrid::default();
        let f = ForecastOptions::default();
        Self {
            train_fraction: f.train_fraction,
            folds: f.folds,
            normalize: f.normalize,
            rounds: g.rounds,
            max_depth: g.max_depth,
            learning_rate: g.learning_rate,
            lambda: g.lambda,
            alpha: g.alpha,
            gamma: g.gamma,
            min_child_weight: g.min_child_weight,
        }
    }
}

impl Default for ForecastSection {
    fn default() -> Self {
        let f = ForecastOptions::default();
        Self {
            horizon: f.horizon,
            level: f.level,
            inflation: f.inflation,
        }
    }
}

/// Keys holding filesystem paths, resolved against a config file's directory.
const PATH_KEYS: [&str; 4] = [
    "out",
    "data.target",
    "data.candidates",
    "endpoint.cache_dir",
];

/// Flattened `(dotted key, default value)` pairs for every config key.
pub fn flag_keys() -> Vec<(String, Value)> {
    let table = Table::try_from(RunConfig::default()).expect("defaults serialize");
    let mut out = Vec::new();
    for (k, v) in table {
        match v {
            Value::Table(section) => {
                for (sk, sv) in section {
                    out.push((format!("{k}.{sk}"), sv));
                }
            }
            other => out.push((k, other)),
        }
    }
    out
}

fn parse_scalar(key: &str, raw: &str, like: &Value) -> Result<Value, ConfigError> {
    let bad = |what: &str| config_err(format!("--{key}: `{raw}` is not {what}"));
    Ok(match like {
        Value::Integer(_) => Value::Integer(raw.trim().parse().map_err(|_| bad("an integer"))?),
        Value::Float(_) => Value::Float(raw.trim().parse().map_err(|_| bad("a number"))?),
        Value::Boolean(_) => Value::Boolean(raw.trim().parse().map_err(|_| bad("true or false"))?),
        _ => Value::String(raw.to_string()),
    })
}

/// Converts a flag value to the TOML type of the key's default.
pub fn parse_override(key: &str, raw: &str, default: &Value) -> Result<Value, ConfigError> {
    match default {
        Value::Array(items) => {
            let like = items
                .first()
                .cloned()
                .unwrap_or(Value::String(String::new()));
            if raw.trim().is_empty() {
                return Ok(Value::Array(Vec::new()));
            }
            raw.split(',')
                .map(|part| parse_scalar(key, part.trim(), &like))
                .collect::<Result<Vec<_>, _>>()
                .map(Value::Array)
        }
        other => parse_scalar(key, raw, other),
    }
}

fn set_path(table: &mut Table, key: &str, value: Value) {
    match key.split_once('.') {
        Some((section, rest)) => {
            let entry = table
                .entry(section.to_string())
                .or_insert_with(|| Value::Table(Table::new()));
            if let Value::Table(t) = entry {
                t.insert(rest.to_string(), value);
            }
        }
        None => {
            table.insert(key.to_string(), value);
        }
    }
}

fn get_path<'a>(table: &'a mut Table, key: &str) -> Option<&'a mut Value> {
    match key.split_once('.') {
        Some((section, rest)) => match table.get_mut(section)? {
            Value::Table(t) => t.get_mut(rest),
            _ => None,
        },
        None => table.get_mut(key),
    }
}

fn resolve(base: &Path, v: &mut Value) {
    match v {
        Value::String(s) => {
            let p = Path::new(s.as_str());
            if p.is_relative() && !s.is_empty() {
                *s = base.join(p).to_string_lossy().into_owned();
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|i| resolve(base, i)),
        _ => {}
    }
}

fn resolve_ohlcv(base: &Path, v: &mut Value) {
    if let Value::Array(items) = v {
        for item in items {
            if let Value::String(s) = item {
                if let Some((inst, path)) = s.split_once('=') {
                    let p = Path::new(path);
                    if p.is_relative() {
                        *s = format!("{inst}={}", base.join(p).to_string_lossy());
                    }
                }
            }
        }
    }
}

fn merge(into: &mut Table, from: Table) {
    for (k, v) in from {
        match (into.get_mut(&k), v) {
            (Some(Value::Table(a)), Value::Table(b)) => merge(a, b),
            (_, v) => {
                into.insert(k, v);
            }
        }
    }
}

/// Reads a config file, resolving its relative paths against its directory.
pub fn read_config_file(path: &Path) -> Result<Table, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    let mut table: Table =
        toml::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new(""));
    for key in PATH_KEYS {
        if let Some(v) = get_path(&mut table, key) {
            resolve(base, v);
        }
    }
    if let Some(v) = get_path(&mut table, "data.ohlcv_files") {
        resolve_ohlcv(base, v);
    }
    Ok(table)
}

/// Assembles the effective configuration.
pub fn load(file: Option<&Path>, overrides: &[(String, String)]) -> Result<RunConfig, ConfigError> {
    let defaults: Vec<(String, Value)> = flag_keys();
    let mut table = Table::try_from(RunConfig::default()).expect("defaults serialize");
    if let Some(path) = file {
        merge(&mut table, read_config_file(path)?);
    }
    let mut endpoint = EndpointConfig {
        url_template: String::new(),
        cache_dir: PathBuf::new(),
        ..EndpointConfig::default()
    };
    endpoint
        .apply_env()
        .map_err(|e| config_err(e.to_string()))?;
    if !endpoint.url_template.is_empty() {
        set_path(
            &mut table,
            "endpoint.url_template",
            Value::String(endpoint.url_template),
        );
    }
    if !endpoint.cache_dir.as_os_str().is_empty() {
        set_path(
            &mut table,
            "endpoint.cache_dir",
            Value::String(endpoint.cache_dir.to_string_lossy().into_owned()),
        );
    }
    if std::env::var(dailyproxy::ingest::remote::ENV_CACHE_TTL_HOURS).is_ok() {
        set_path(
            &mut table,
            "endpoint.ttl_hours",
            Value::Float(endpoint.ttl_hours),
        );
    }
    for (key, raw) in overrides {
        let default = defaults
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v)
            .ok_or_else(|| config_err(format!("unknown configuration key `{key}`")))?;
        set_path(&mut table, key, parse_override(key, raw, default)?);
    }
    let config: RunConfig = table
        .try_into()
        .map_err(|e: toml::de::Error| config_err(format!("invalid configuration: {e}")))?;
    config.validate()?;
    Ok(config)
}

impl RunConfig {
    /// Checks every setting without touching the filesystem.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let wrap = |e: dailyproxy::Error| config_err(e.to_string());
        if self.data.candidates.is_empty()
            && self.data.ohlcv_files.is_empty()
            && self.data.remote_instruments.is_empty()
        {
            return Err(config_err("no candidate sources configured"));
        }
        if self.data.start > self.data.end {
            return Err(config_err(format!(
                "data.start {} is after data.end {}",
                self.data.start, self.data.end
            )));
        }
        for entry in &self.data.ohlcv_files {
            match entry.split_once('=') {
                Some((inst, path)) if !inst.is_empty() && !path.is_empty() => {}
                _ => {
                    return Err(config_err(format!(
                        "data.ohlcv_files entry `{entry}` must look like Instrument=path"
                    )))
                }
            }
        }
        self.catalog()?;
        self.endpoint_config().validate().map_err(wrap)?;
        self.autoencoder().validate().map_err(wrap)?;
        self.selection()?.similarity.validate().map_err(wrap)?;
        if self.similarity.k == 0 {
            return Err(config_err("similarity.k must be at least 1"));
        }
        self.forecast_options().validate().map_err(wrap)?;
        Ok(())
    }

    pub fn catalog(&self) -> Result<Option<CandidateCatalog>, ConfigError> {
        if self.data.catalog.is_empty() {
            return Ok(None);
        }
        CandidateCatalog::from_ids(&self.data.catalog)
            .map(Some)
            .map_err(|e| config_err(format!("data.catalog: {e}")))
    }

    pub fn endpoint_config(&self) -> EndpointConfig {
        EndpointConfig {
            url_template: self.endpoint.url_template.clone(),
            cache_dir: self.endpoint.cache_dir.clone(),
            ttl_hours: self.endpoint.ttl_hours,
            offline: self.offline,
            timeout_secs: self.endpoint.timeout_secs,
        }
    }

    pub fn autoencoder(&self) -> AutoencoderConfig {
        AutoencoderConfig {
            hidden: (self.impute.hidden > 0).then_some(self.impute.hidden),
            learning_rate: self.impute.learning_rate,
            epochs: self.impute.epochs,
            seed: self.seed,
        }
    }

    pub fn selection(&self) -> Result<SelectionOptions, ConfigError> {
        let methods = self
            .similarity
            .methods
            .iter()
            .map(|m| m.parse::<Method>().map_err(|e| config_err(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        if methods.is_empty() {
            return Err(config_err("similarity.methods is empty"));
        }
        Ok(SelectionOptions {
            methods,
            similarity: SimilarityConfig {
                epsilon: self.similarity.epsilon,
                gamma: self.similarity.gamma,
                band: usize::try_from(self.similarity.band).ok(),
            },
            k: self.similarity.k,
            normalize: self.similarity.normalize,
        })
    }

    pub fn forecast_options(&self) -> ForecastOptions {
        ForecastOptions {
            features: self.features.clone(),
            train_fraction: self.model.train_fraction,
            grid: HyperGrid {
                rounds: self.model.rounds.clone(),
                max_depth: self.model.max_depth.clone(),
                learning_rate: self.model.learning_rate.clone(),
                lambda: self.model.lambda.clone(),
                alpha: self.model.alpha.clone(),
                gamma: self.model.gamma.clone(),
                min_child_weight: self.model.min_child_weight.clone(),
            },
            folds: self.model.folds,
            seed: self.seed,
            horizon: self.forecast.horizon,
            level: self.forecast.level,
            inflation: self.forecast.inflation,
            normalize: self.model.normalize,
        }
    }

    /// The effective configuration as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn every_key_has_a_flag() {
        let keys: Vec<String> = flag_keys().into_iter().map(|(k, _)| k).collect();
        for k in [
            "seed",
            "out",
            "offline",
            "similarity.epsilon",
            "model.rounds",
            "features.lags",
            "data.proxy",
        ] {
            assert!(keys.iter().any(|x| x == k), "missing {k}");
        }
    }

    #[test]
    fn overrides_are_typed() {
        let cfg = load(
            None,
            &[
                ("similarity.epsilon".into(), "0.3".into()),
                ("model.rounds".into(), "10, 20".into()),
                ("features.day_of_week".into(), "false".into()),
                ("data.proxy".into(), "Volume_Brent".into()),
            ],
        )
        .unwrap();
        assert_eq!(cfg.similarity.epsilon, 0.3);
        assert_eq!(cfg.model.rounds, vec![10, 20]);
        assert!(!cfg.features.day_of_week);
        assert_eq!(cfg.data.proxy, "Volume_Brent");
    }

    #[test]
    fn bad_values_rejected() {
        assert!(load(None, &[("similarity.k".into(), "zero".into())]).is_err());
        assert!(load(None, &[("similarity.k".into(), "0".into())]).is_err());
        assert!(load(None, &[("nope".into(), "1".into())]).is_err());
        assert!(load(None, &[("forecast.inflation".into(), "0.5".into())]).is_err());
        assert!(load(None, &[("similarity.methods".into(), "dtw,bogus".into())]).is_err());
    }

    #[test]
    fn file_paths_resolve_against_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "seed = 7\n[data]\ntarget = \"t.csv\"\nohlcv_files = [\"Brent=b.csv\"]\n[forecast]\nhorizon = 3\n",
        )
        .unwrap();
        let cfg = load(Some(&path), &[("seed".into(), "9".into())]).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.forecast.horizon, 3);
        assert_eq!(cfg.data.target, dir.path().join("t.csv"));
        assert_eq!(
            cfg.data.ohlcv_files,
            vec![format!("Brent={}", dir.path().join("b.csv").display())]
        );
    }

    #[test]
    fn unknown_file_keys_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "[similarity]\nepsilom = 0.2\n").unwrap();
        assert!(load(Some(&path), &[]).is_err());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = RunConfig::default();
        let back: RunConfig = toml::from_str(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }
}
