//! Point-set and lock-step measures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A non-empty finite set of planar points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet2D(Vec<(f64, f64)>);

impl PointSet2D {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("point set must be non-empty".into()));
        }
        if points.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(Error::NonFinite {
                context: "point set".into(),
            });
        }
        Ok(Self(points))
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.0
    }
}

fn directed(from: &[(f64, f64)], to: &[(f64, f64)]) -> f64 {
    from.iter()
        .map(|&(px, py)| {
            to.iter()
                .map(|&(qx, qy)| (px - qx).hypot(py - qy))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Symmetric Hausdorff distance under the Euclidean norm.
pub fn hausdorff(a: &PointSet2D, b: &PointSet2D) -> Result<f64> {
    if a.0.is_empty() || b.0.is_empty() {
        return Err(Error::InvalidArgument(
            "hausdorff distance needs non-empty point sets".into(),
        ));
    }
    Ok(directed(&a.0, &b.0).max(directed(&b.0, &a.0)))
}

/// Maps a series to points `(i / (n - 1), x_i)`, so time spans `[0, 1]`.
pub fn embed_as_trajectory(x: &[f64]) -> Result<PointSet2D> {
    if x.len() < 2 {
        return Err(Error::TooShort {
            id: "trajectory".into(),
            needed: 2,
            got: x.len(),
        });
    }
    let last = (x.len() - 1) as f64;
    PointSet2D::new(
        x.iter()
            .enumerate()
            .map(|(i, &v)| (i as f64 / last, v))
            .collect(),
    )
}

/// Lock-step Euclidean distance between equal-length sequences.
pub fn euclidean(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(points: &[(f64, f64)]) -> PointSet2D {
        PointSet2D::new(points.to_vec()).unwrap()
    }

    #[test]
    fn hausdorff_examples() {
        let a = set(&[(0.0, 0.0), (1.0, 0.0)]);
        let b = set(&[(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(hausdorff(&a, &a).unwrap(), 0.0);
        assert_eq!(hausdorff(&a, &b).unwrap(), 1.0);
        let p = set(&[(1.0, 2.0)]);
        let q = set(&[(4.0, 6.0)]);
        assert_eq!(hausdorff(&p, &q).unwrap(), 5.0);
        assert!(PointSet2D::new(vec![]).is_err());
    }

    #[test]
    fn embedding() {
        assert_eq!(
            embed_as_trajectory(&[5.0, 7.0]).unwrap().points(),
            &[(0.0, 5.0), (1.0, 7.0)]
        );
        let xs: Vec<f64> = embed_as_trajectory(&[1.0, 2.0, 3.0])
            .unwrap()
            .points()
            .iter()
            .map(|p| p.0)
            .collect();
        assert_eq!(xs, vec![0.0, 0.5, 1.0]);
        let flat = embed_as_trajectory(&[4.0; 5]).unwrap();
        assert!(flat.points().iter().all(|p| p.1 == 4.0));
        assert!(embed_as_trajectory(&[1.0]).is_err());
    }

    #[test]
    fn euclidean_examples() {
        let x = [0.3, -1.2, 4.0];
        assert_eq!(euclidean(&x, &x).unwrap(), 0.0);
        assert_eq!(euclidean(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        let c = -2.5;
        let y = [1.0, 2.0, -0.5];
        let sx: Vec<f64> = x.iter().map(|v| v * c).collect();
        let sy: Vec<f64> = y.iter().map(|v| v * c).collect();
        let lhs = euclidean(&sx, &sy).unwrap();
        let rhs = c.abs() * euclidean(&x, &y).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
        assert!(euclidean(&[1.0], &[1.0, 2.0]).is_err());
    }
}
