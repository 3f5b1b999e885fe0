//! Autoencoder gap filling.
//!
//! A single-hidden-layer autoencoder (tanh hidden units, linear outputs) is
//! trained full-batch on the observed cells only. Missing inputs start at
//! zero, the column mean after standardization, and are replaced by the
//! current reconstruction after every epoch so the network sees
//! self-consistent rows. Weights are updated with Adam.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DataMatrix, NormalizationParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AutoencoderConfig {
    /// Hidden width; `None` uses `ceil(columns / 2)`.
    pub hidden: Option<usize>,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for AutoencoderConfig {
    fn default() -> Self {
        Self {
            hidden: None,
            learning_rate: 0.05,
            epochs: 500,
            seed: 42,
        }
    }
}

impl AutoencoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == Some(0) {
            return Err(Error::InvalidArgument(
                "autoencoder hidden width must be >= 1".into(),
            ));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidArgument(
                "autoencoder epochs must be >= 1".into(),
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(
                "autoencoder learning rate must be positive".into(),
            ));
        }
        Ok(())
    }

    fn hidden_width(&self, cols: usize) -> usize {
        self.hidden.unwrap_or(cols.div_ceil(2)).max(1)
    }
}

/// Row-major dense matrix, only what the trainer needs.
struct Dense {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Dense {
    fn uniform(rows: usize, cols: usize, limit: f64, rng: &mut ChaCha8Rng) -> Self {
        let data = (0..rows * cols)
            .map(|_| rng.random_range(-limit..=limit))
            .collect();
        Self { rows, cols, data }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64, t: i32) {
        let c1 = 1.0 - Self::BETA1.powi(t);
        let c2 = 1.0 - Self::BETA2.powi(t);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grad)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = Self::BETA1 * *m + (1.0 - Self::BETA1) * g;
            *v = Self::BETA2 * *v + (1.0 - Self::BETA2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + Self::EPS);
        }
    }
}

struct Autoencoder {
    w1: Dense, // d x h
    b1: Vec<f64>,
    w2: Dense, // h x d
    b2: Vec<f64>,
}

impl Autoencoder {
    fn new(d: usize, h: usize, rng: &mut ChaCha8Rng) -> Self {
        let limit = (6.0 / (d + h) as f64).sqrt();
        Self {
            w1: Dense::uniform(d, h, limit, rng),
            b1: vec![0.0; h],
            w2: Dense::uniform(h, d, limit, rng),
            b2: vec![0.0; d],
        }
    }

    /// Hidden activations and reconstruction of one row.
    fn forward_row(&self, x: &[f64], hidden: &mut [f64], out: &mut [f64]) {
        let (d, h) = (self.w1.rows, self.w1.cols);
        hidden.copy_from_slice(&self.b1);
        for (k, &xk) in x.iter().enumerate() {
            if xk != 0.0 {
                for (a, w) in hidden.iter_mut().zip(self.w1.row(k)) {
                    *a += xk * w;
                }
            }
        }
        for a in hidden.iter_mut() {
            *a = a.tanh();
        }
        out.copy_from_slice(&self.b2);
        for (u, &a) in hidden.iter().enumerate().take(h) {
            for (o, w) in out.iter_mut().zip(self.w2.row(u)) {
                *o += a * w;
            }
        }
        debug_assert_eq!(out.len(), d);
    }
}

/// Fills missing cells of an already standardized matrix.
///
/// Observed cells are returned bit-identical and the output mask is all
/// observed. Results depend only on the inputs and `config.seed`.
pub fn impute_autoencoder(matrix: &DataMatrix, config: &AutoencoderConfig) -> Result<DataMatrix> {
    config.validate()?;
    let (n, d) = (matrix.n_rows(), matrix.n_cols());
    if n == 0 || d == 0 {
        return Err(Error::InvalidArgument(
            "cannot impute an empty matrix".into(),
        ));
    }
    let mask = matrix.mask();
    if matrix
        .values()
        .iter()
        .zip(mask)
        .any(|(v, &obs)| obs && !v.is_finite())
    {
        return Err(Error::NonFinite {
            context: "imputation input".into(),
        });
    }
    let missing = matrix.missing_count();
    if missing == 0 {
        return Ok(matrix.clone());
    }

    let h = config.hidden_width(d);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut net = Autoencoder::new(d, h, &mut rng);

    let mut x: Vec<f64> = matrix
        .values()
        .iter()
        .zip(mask)
        .map(|(&v, &obs)| if obs { v } else { 0.0 })
        .collect();
    let n_obs = (n * d - missing) as f64;

    let mut hidden = vec![0.0; n * h];
    let mut recon = vec![0.0; n * d];
    let mut g_w1 = vec![0.0; d * h];
    let mut g_b1 = vec![0.0; h];
    let mut g_w2 = vec![0.0; h * d];
    let mut g_b2 = vec![0.0; d];
    let mut opt_w1 = Adam::new(d * h);
    let mut opt_b1 = Adam::new(h);
    let mut opt_w2 = Adam::new(h * d);
    let mut opt_b2 = Adam::new(d);
    let mut d_out = vec![0.0; d];
    let mut d_hidden = vec![0.0; h];

    for epoch in 1..=config.epochs {
        g_w1.iter_mut().for_each(|g| *g = 0.0);
        g_b1.iter_mut().for_each(|g| *g = 0.0);
        g_w2.iter_mut().for_each(|g| *g = 0.0);
        g_b2.iter_mut().for_each(|g| *g = 0.0);
        let mut loss = 0.0;

        for i in 0..n {
            let xi = &x[i * d..(i + 1) * d];
            let hi = &mut hidden[i * h..(i + 1) * h];
            let ri = &mut recon[i * d..(i + 1) * d];
            net.forward_row(xi, hi, ri);

            for k in 0..d {
                d_out[k] = if mask[i * d + k] {
                    let e = ri[k] - xi[k];
                    loss += e * e;
                    2.0 * e / n_obs
                } else {
                    0.0
                };
            }
            for (k, &g) in d_out.iter().enumerate() {
                g_b2[k] += g;
            }
            for u in 0..h {
                let a = hi[u];
                let w2_row = net.w2.row(u);
                let g_row = &mut g_w2[u * d..(u + 1) * d];
                let mut back = 0.0;
                for k in 0..d {
                    g_row[k] += a * d_out[k];
                    back += d_out[k] * w2_row[k];
                }
                d_hidden[u] = back * (1.0 - a * a);
                g_b1[u] += d_hidden[u];
            }
            for (k, &xk) in xi.iter().enumerate() {
                if xk != 0.0 {
                    let g_row = &mut g_w1[k * h..(k + 1) * h];
                    for (g, &dh) in g_row.iter_mut().zip(&d_hidden) {
                        *g += xk * dh;
                    }
                }
            }
        }

        if !loss.is_finite() {
            return Err(Error::Diverged(format!(
                "autoencoder loss became non-finite at epoch {epoch}"
            )));
        }

        let t = epoch.min(i32::MAX as usize) as i32;
        opt_w1.step(&mut net.w1.data, &g_w1, config.learning_rate, t);
        opt_b1.step(&mut net.b1, &g_b1, config.learning_rate, t);
        opt_w2.step(&mut net.w2.data, &g_w2, config.learning_rate, t);
        opt_b2.step(&mut net.b2, &g_b2, config.learning_rate, t);

        // Feed the current reconstruction back into the missing inputs.
        for (k, &obs) in mask.iter().enumerate() {
            if !obs {
                x[k] = recon[k];
            }
        }
    }

    // Final reconstruction with the trained weights.
    let mut out_values = matrix.values().to_vec();
    let mut hi = vec![0.0; h];
    let mut ri = vec![0.0; d];
    for i in 0..n {
        net.forward_row(&x[i * d..(i + 1) * d], &mut hi, &mut ri);
        for k in 0..d {
            if !mask[i * d + k] {
                if !ri[k].is_finite() {
                    return Err(Error::NonFinite {
                        context: format!("imputed cell ({i}, {k})"),
                    });
                }
                out_values[i * d + k] = ri[k];
            }
        }
    }
    Ok(matrix.with_cells(out_values, vec![true; n * d]))
}

/// Standardizes each column, imputes, and maps imputed cells back to raw
/// units. Observed cells are copied from the input untouched.
pub fn impute_raw(matrix: &DataMatrix, config: &AutoencoderConfig) -> Result<DataMatrix> {
    let (n, d) = (matrix.n_rows(), matrix.n_cols());
    if matrix.missing_count() == 0 {
        return Ok(matrix.clone());
    }
    let params: Vec<NormalizationParams> = (0..d)
        .map(|j| {
            let observed: Vec<f64> = (0..n).filter_map(|i| matrix.get(i, j)).collect();
            NormalizationParams::fit(&matrix.ids()[j], &observed)
        })
        .collect::<Result<_>>()?;
    let scaled: Vec<f64> = matrix
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| params[k % d].apply(*v))
        .collect();
    let scaled = matrix.with_cells(scaled, matrix.mask().to_vec());
    let filled = impute_autoencoder(&scaled, config)?;
    let values = matrix
        .values()
        .iter()
        .zip(matrix.mask())
        .enumerate()
        .map(|(k, (&raw, &obs))| {
            if obs {
                raw
            } else {
                params[k % d].invert(filled.values()[k])
            }
        })
        .collect();
    Ok(matrix.with_cells(values, vec![true; n * d]))
}
