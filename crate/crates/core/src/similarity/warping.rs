//! Dynamic time warping and its soft-minimum relaxation.
//!
//! Both use the squared difference as local cost and share the same banded
//! recurrence, so Soft-DTW tends to DTW as gamma goes to zero.

use super::SimilarityConfig;
use crate::error::{Error, Result};

fn check_inputs(x: &[f64], y: &[f64], band: Option<usize>) -> Result<()> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::InvalidArgument(
            "warping distances need non-empty sequences".into(),
        ));
    }
    if let Some(band) = band {
        let gap = x.len().abs_diff(y.len());
        if band < gap {
            return Err(Error::BandTooNarrow {
                band,
                m: x.len(),
                n: y.len(),
            });
        }
    }
    Ok(())
}

/// Fills the accumulated-cost table row by row. `combine` receives the three
/// predecessors (up, left, diagonal); infinite entries are outside the band.
fn accumulate(
    x: &[f64],
    y: &[f64],
    band: Option<usize>,
    combine: impl Fn(f64, f64, f64) -> f64,
) -> f64 {
    let n = y.len();
    let band = band.unwrap_or(usize::MAX);
    let mut prev = vec![f64::INFINITY; n + 1];
    let mut curr = vec![f64::INFINITY; n + 1];
    prev[0] = 0.0;
    for (i, &a) in x.iter().enumerate() {
        curr.fill(f64::INFINITY);
        let lo = i.saturating_sub(band);
        let hi = i.saturating_add(band).min(n - 1);
        for j in lo..=hi {
            let cost = (a - y[j]) * (a - y[j]);
            curr[j + 1] = cost + combine(prev[j + 1], curr[j], prev[j]);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[n]
}

/// Minimal accumulated squared-difference cost over all monotone warping paths.
pub fn dtw(x: &[f64], y: &[f64], config: &SimilarityConfig) -> Result<f64> {
    check_inputs(x, y, config.band)?;
    Ok(accumulate(x, y, config.band, |a, b, c| a.min(b).min(c)))
}

/// `-gamma * ln(sum(exp(-v / gamma)))`, evaluated with a max shift.
///
/// Arguments are sorted first so the result does not depend on their order.
fn softmin(a: f64, b: f64, c: f64, gamma: f64) -> f64 {
    let mut v = [a, b, c];
    v.sort_by(f64::total_cmp);
    let lowest = v[0];
    if lowest == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = v.iter().map(|&x| (-(x - lowest) / gamma).exp()).sum();
    lowest - gamma * sum.ln()
}

/// Soft-DTW: the DTW recurrence with `min` replaced by a gamma-smoothed softmin.
/// May be negative.
pub fn soft_dtw(x: &[f64], y: &[f64], config: &SimilarityConfig) -> Result<f64> {
    let gamma = config.gamma;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "soft-dtw gamma must be positive, got {gamma}"
        )));
    }
    check_inputs(x, y, config.band)?;
    // The origin cell has a single predecessor; keep it exact.
    Ok(accumulate(x, y, config.band, |a, b, c| {
        if a == f64::INFINITY && b == f64::INFINITY {
            c
        } else {
            softmin(a, b, c, gamma)
        }
    }))
}
