//! OHLCV fetches from a JSON chart endpoint, cached on disk.
//!
//! The endpoint is a URL template with `{instrument}`, `{start}` and `{end}`
//! placeholders (dates as `YYYY-MM-DD`, range inclusive). The response is a
//! columnar JSON object:
//!
//! ```json
//! {"dates": ["2020-01-02", "2020-01-03"],
//!  "open": [1.0, null], "high": [..], "low": [..],
//!  "close": [..], "adj_close": [..], "volume": [..]}
//! ```
//!
//! Every column other than `dates` may be omitted or contain `null`s.
//!
//! Raw response bodies are cached under the SHA-256 of the request key with
//! a small metadata file next to each body. Both are written to a temporary
//! file and renamed into place, so a reader never sees a partial entry.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::ohlcv::OhlcvRecord;
use crate::error::{Error, Result};

pub const ENV_ENDPOINT: &str = "DAILYPROXY_ENDPOINT";
pub const ENV_CACHE_DIR: &str = "DAILYPROXY_CACHE_DIR";
pub const ENV_CACHE_TTL_HOURS: &str = "DAILYPROXY_CACHE_TTL_HOURS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EndpointConfig {
    pub url_template: String,
    pub cache_dir: PathBuf,
    pub ttl_hours: f64,
    /// Never touch the network; stale cache entries are served instead.
    pub offline: bool,
    pub timeout_secs: u64,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        Self {
            url_template: "http://127.0.0.1:8787/chart/{instrument}?start={start}&end={end}".into(),
            cache_dir: PathBuf::from(".dailyproxy-cache"),
            ttl_hours: 24.0,
            offline: false,
            timeout_secs: 30,
        }
    }
}

impl EndpointConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.url_template.contains("{instrument}") {
            return Err(Error::InvalidArgument(
                "endpoint url template must contain {instrument}".into(),
            ));
        }
        if !(self.ttl_hours >= 0.0 && self.ttl_hours.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "cache ttl must be a non-negative number of hours, got {}",
                self.ttl_hours
            )));
        }
        if self.timeout_secs == 0 {
            return Err(Error::InvalidArgument(
                "request timeout must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Applies `DAILYPROXY_ENDPOINT`, `DAILYPROXY_CACHE_DIR` and
    /// `DAILYPROXY_CACHE_TTL_HOURS` when set.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(ENV_ENDPOINT) {
            self.url_template = v;
        }
        if let Ok(v) = std::env::var(ENV_CACHE_DIR) {
            self.cache_dir = PathBuf::from(v);
        }
        if let Ok(v) = std::env::var(ENV_CACHE_TTL_HOURS) {
            self.ttl_hours = v.trim().parse().map_err(|_| {
                Error::InvalidArgument(format!("{ENV_CACHE_TTL_HOURS} is not a number: `{v}`"))
            })?;
        }
        Ok(())
    }

    pub fn url_for(&self, instrument: &str, start: NaiveDate, end: NaiveDate) -> String {
        self.url_template
            .replace("{instrument}", &percent_encode(instrument))
            .replace("{start}", &start.format("%Y-%m-%d").to_string())
            .replace("{end}", &end.format("%Y-%m-%d").to_string())
    }
}

fn percent_encode(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for b in s.bytes() {
        if b.is_ascii_alphanumeric() || b"-._~".contains(&b) {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct EntryMeta {
    instrument: String,
    start: NaiveDate,
    end: NaiveDate,
    url: String,
    fetched_at: u64,
    body_sha256: String,
}

/// Content-addressed response store.
pub struct ResponseCache {
    dir: PathBuf,
}

pub(crate) struct CachedBody {
    pub body: Vec<u8>,
    pub age: Duration,
}

fn now_secs() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl ResponseCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn key(instrument: &str, start: NaiveDate, end: NaiveDate) -> String {
        sha256_hex(format!("{instrument}\u{1f}{start}\u{1f}{end}").as_bytes())
    }

    fn body_path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    fn meta_path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.meta.json"))
    }

    pub(crate) fn lookup(&self, key: &str) -> Option<CachedBody> {
        let meta = std::fs::read(self.meta_path(key)).ok()?;
        let meta: EntryMeta = serde_json::from_slice(&meta).ok()?;
        let body = std::fs::read(self.body_path(key)).ok()?;
        if sha256_hex(&body) != meta.body_sha256 {
            log::warn!("cache entry {key} does not match its checksum; ignoring it");
            return None;
        }
        let age = Duration::from_secs(now_secs().saturating_sub(meta.fetched_at));
        Some(CachedBody { body, age })
    }

    /// Stores a response body. `fetched_at` is seconds since the Unix epoch.
    pub fn store(
        &self,
        instrument: &str,
        start: NaiveDate,
        end: NaiveDate,
        url: &str,
        body: &[u8],
        fetched_at: u64,
    ) -> Result<()> {
        std::fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let key = Self::key(instrument, start, end);
        let meta = EntryMeta {
            instrument: instrument.to_string(),
            start,
            end,
            url: url.to_string(),
            fetched_at,
            body_sha256: sha256_hex(body),
        };
        let meta = serde_json::to_vec_pretty(&meta).expect("metadata serializes");
        write_atomic(&self.body_path(&key), body)?;
        write_atomic(&self.meta_path(&key), &meta)
    }
}

/// Writes through a uniquely named temporary file and renames it into place.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let n = COUNTER.fetch_add(1, Ordering::Relaxed);
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.{}.{n}.tmp", std::process::id()));
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

/// Daily records for `instrument` over the inclusive range `start..=end`.
///
/// Fresh cache entries are served without network access. In offline mode,
/// or when the request fails, a stale entry is served with a warning; with
/// no entry at all, offline mode yields [`Error::OfflineViolation`].
pub fn fetch_remote_ohlcv(
    instrument: &str,
    start: NaiveDate,
    end: NaiveDate,
    config: &EndpointConfig,
) -> Result<Vec<OhlcvRecord>> {
    config.validate()?;
    if start > end {
        return Ok(Vec::new());
    }
    let cache = ResponseCache::new(&config.cache_dir);
    let key = ResponseCache::key(instrument, start, end);
    let cached = cache.lookup(&key);
    let ttl = Duration::from_secs_f64(config.ttl_hours * 3600.0);

    if let Some(entry) = &cached {
        if entry.age < ttl {
            log::debug!("{instrument}: served from cache");
            return parse_payload(&entry.body, start, end);
        }
    }
    if config.offline {
        return match cached {
            Some(entry) => {
                log::warn!(
                    "{instrument}: offline, serving cached response {} h old",
                    entry.age.as_secs() / 3600
                );
                parse_payload(&entry.body, start, end)
            }
            None => Err(Error::OfflineViolation {
                instrument: instrument.to_string(),
            }),
        };
    }

    let url = config.url_for(instrument, start, end);
    match http_get(&url, config.timeout_secs) {
        Ok(body) => {
            let records = parse_payload(&body, start, end)?;
            cache.store(instrument, start, end, &url, &body, now_secs())?;
            Ok(records)
        }
        Err(err) => match cached {
            Some(entry) => {
                log::warn!("{instrument}: {err}; serving stale cached response");
                parse_payload(&entry.body, start, end)
            }
            None => Err(err),
        },
    }
}

fn http_get(url: &str, timeout_secs: u64) -> Result<Vec<u8>> {
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs(timeout_secs)))
        .http_status_as_error(false)
        .build()
        .into();
    let http_err = |status: Option<u16>, message: String| Error::Http {
        url: url.to_string(),
        status,
        message,
    };
    let mut response = agent
        .get(url)
        .call()
        .map_err(|e| http_err(None, e.to_string()))?;
    let status = response.status().as_u16();
    if !(200..300).contains(&status) {
        return Err(http_err(Some(status), format!("HTTP status {status}")));
    }
    response
        .body_mut()
        .read_to_vec()
        .map_err(|e| http_err(Some(status), e.to_string()))
}

fn payload_err(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Payload {
        field: field.into(),
        message: message.into(),
    }
}

/// Parses a columnar payload, keeping rows inside `start..=end`, sorted by
/// date with duplicate dates collapsed to their first occurrence.
pub fn parse_payload(body: &[u8], start: NaiveDate, end: NaiveDate) -> Result<Vec<OhlcvRecord>> {
    let doc: Value =
        serde_json::from_slice(body).map_err(|e| payload_err("<document>", e.to_string()))?;
    let obj = doc
        .as_object()
        .ok_or_else(|| payload_err("<document>", "expected a JSON object"))?;
    let dates = obj
        .get("dates")
        .ok_or_else(|| payload_err("dates", "missing"))?
        .as_array()
        .ok_or_else(|| payload_err("dates", "expected an array"))?;
    let n = dates.len();
    let column = |name: &str| -> Result<Vec<Option<f64>>> {
        let Some(v) = obj.get(name) else {
            return Ok(vec![None; n]);
        };
        let arr = v
            .as_array()
            .ok_or_else(|| payload_err(name, "expected an array"))?;
        if arr.len() != n {
            return Err(payload_err(
                name,
                format!("has {} entries but `dates` has {n}", arr.len()),
            ));
        }
        arr.iter()
            .enumerate()
            .map(|(i, v)| match v {
                Value::Null => Ok(None),
                Value::Number(x) => match x.as_f64() {
                    Some(f) if f.is_finite() => Ok(Some(f)),
                    _ => Err(payload_err(format!("{name}[{i}]"), "not a finite number")),
                },
                other => Err(payload_err(
                    format!("{name}[{i}]"),
                    format!("expected a number or null, found {other}"),
                )),
            })
            .collect()
    };
    let open = column("open")?;
    let high = column("high")?;
    let low = column("low")?;
    let close = column("close")?;
    let adj_close = column("adj_close")?;
    let volume = column("volume")?;

    let mut records = Vec::with_capacity(n);
    for (i, d) in dates.iter().enumerate() {
        let field = || format!("dates[{i}]");
        let text = d
            .as_str()
            .ok_or_else(|| payload_err(field(), "expected a date string"))?;
        let date = NaiveDate::parse_from_str(text, "%Y-%m-%d")
            .map_err(|_| payload_err(field(), format!("invalid date `{text}`")))?;
        if date < start || date > end {
            continue;
        }
        let rec = OhlcvRecord {
            date,
            open: open[i],
            high: high[i],
            low: low[i],
            close: close[i],
            adj_close: adj_close[i],
            volume: volume[i],
        };
        rec.validate()
            .map_err(|e| payload_err(format!("row {i}"), e.to_string()))?;
        records.push(rec);
    }
    records.sort_by_key(|r| r.date);
    records.dedup_by_key(|r| r.date);
    Ok(records)
}

/// Serializes records in the endpoint's columnar format.
pub fn payload_json(records: &[OhlcvRecord]) -> String {
    let col = |f: fn(&OhlcvRecord) -> Option<f64>| -> Vec<Option<f64>> {
        records.iter().map(f).collect()
    };
    let doc = serde_json::json!({
        "dates": records.iter().map(|r| r.date.format("%Y-%m-%d").to_string()).collect::<Vec<_>>(),
        "open": col(|r| r.open),
        "high": col(|r| r.high),
        "low": col(|r| r.low),
        "close": col(|r| r.close),
        "adj_close": col(|r| r.adj_close),
        "volume": col(|r| r.volume),
    });
    serde_json::to_string(&doc).expect("payload serializes")
}
