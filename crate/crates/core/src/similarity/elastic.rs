//! Threshold-based elastic measures: LCSS and EDR.

use crate::error::{Error, Result};

/// Length of the longest common subsequence where `x_i` and `y_j` match when
/// `|x_i - y_j| <= epsilon`.
pub fn lcs_length(x: &[f64], y: &[f64], epsilon: f64) -> usize {
    let n = y.len();
    let mut prev = vec![0usize; n + 1];
    let mut curr = vec![0usize; n + 1];
    for &a in x {
        for (j, &b) in y.iter().enumerate() {
            curr[j + 1] = if (a - b).abs() <= epsilon {
                prev[j] + 1
            } else {
                prev[j + 1].max(curr[j])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[n]
}

/// `1 - lcs / min(m, n)`, in `[0, 1]`.
pub fn lcss_distance(x: &[f64], y: &[f64], epsilon: f64) -> Result<f64> {
    let shorter = x.len().min(y.len());
    if shorter == 0 {
        return Err(Error::InvalidArgument(
            "lcss distance needs non-empty sequences".into(),
        ));
    }
    Ok(1.0 - lcs_length(x, y, epsilon) as f64 / shorter as f64)
}

/// Edit distance on real sequences: unit cost for deleting a point or for
/// pairing two points further apart than `epsilon` (strictly `< epsilon`
/// counts as a match). Empty inputs are allowed.
pub fn edr(x: &[f64], y: &[f64], epsilon: f64) -> usize {
    let n = y.len();
    let mut prev: Vec<usize> = (0..=n).collect();
    let mut curr = vec![0usize; n + 1];
    for (i, &a) in x.iter().enumerate() {
        curr[0] = i + 1;
        for (j, &b) in y.iter().enumerate() {
            let penalty = usize::from((a - b).abs() >= epsilon);
            curr[j + 1] = (prev[j] + penalty).min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[n]
}
