//! Brute-force reference implementations used to check the dynamic programs.
//!
//! Nothing here shares code with the library: every oracle enumerates the
//! objects its measure is defined over (warping paths, index subsets, edit
//! scripts) and takes the best one.

#![allow(dead_code)]

/// Every monotone warping path from `(0, 0)` to `(m - 1, n - 1)`.
pub fn warping_paths(m: usize, n: usize) -> Vec<Vec<(usize, usize)>> {
    fn walk(
        i: usize,
        j: usize,
        m: usize,
        n: usize,
        path: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        path.push((i, j));
        if i + 1 == m && j + 1 == n {
            out.push(path.clone());
        } else {
            if i + 1 < m {
                walk(i + 1, j, m, n, path, out);
            }
            if j + 1 < n {
                walk(i, j + 1, m, n, path, out);
            }
            if i + 1 < m && j + 1 < n {
                walk(i + 1, j + 1, m, n, path, out);
            }
        }
        path.pop();
    }
    let mut out = Vec::new();
    walk(0, 0, m, n, &mut Vec::new(), &mut out);
    out
}

/// Minimum squared-difference cost over the given paths.
pub fn dtw_over_paths(x: &[f64], y: &[f64], paths: &[Vec<(usize, usize)>]) -> f64 {
    paths
        .iter()
        .map(|p| p.iter().map(|&(i, j)| (x[i] - y[j]).powi(2)).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

pub fn dtw_brute(x: &[f64], y: &[f64]) -> f64 {
    dtw_over_paths(x, y, &warping_paths(x.len(), y.len()))
}

/// Increasing index subsets of `0..len` with exactly `k` elements.
pub fn subsets(len: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..(1 << len))
        .filter(|mask| mask.count_ones() as usize == k)
        .map(|mask| (0..len).filter(|i| mask & (1 << i) != 0).collect())
        .collect()
}

/// Largest `k` such that some `k`-subsequence of `x` matches some
/// `k`-subsequence of `y` element-wise within `epsilon`.
pub fn lcs_brute(x: &[f64], y: &[f64], epsilon: f64) -> usize {
    for k in (1..=x.len().min(y.len())).rev() {
        for sx in subsets(x.len(), k) {
            for sy in subsets(y.len(), k) {
                if sx
                    .iter()
                    .zip(&sy)
                    .all(|(&i, &j)| (x[i] - y[j]).abs() <= epsilon)
                {
                    return k;
                }
            }
        }
    }
    0
}

/// Precomputed paths and subsets for every length up to `max_len`, so the
/// oracles can run over hundreds of thousands of pairs without reallocating.
pub struct Tables {
    max_len: usize,
    paths: Vec<Vec<(usize, usize)>>,
    path_ranges: Vec<std::ops::Range<usize>>,
    subsets: Vec<Vec<Vec<Vec<usize>>>>,
}

impl Tables {
    pub fn new(max_len: usize) -> Self {
        let mut paths = Vec::new();
        let mut path_ranges = Vec::new();
        for m in 0..=max_len {
            for n in 0..=max_len {
                let start = paths.len();
                if m > 0 && n > 0 {
                    paths.extend(warping_paths(m, n));
                }
                path_ranges.push(start..paths.len());
            }
        }
        let subsets = (0..=max_len)
            .map(|len| (0..=len).map(|k| subsets(len, k)).collect())
            .collect();
        Self {
            max_len,
            paths,
            path_ranges,
            subsets,
        }
    }

    pub fn paths(&self, m: usize, n: usize) -> &[Vec<(usize, usize)>] {
        &self.paths[self.path_ranges[m * (self.max_len + 1) + n].clone()]
    }

    pub fn dtw(&self, x: &[f64], y: &[f64]) -> f64 {
        dtw_over_paths(x, y, self.paths(x.len(), y.len()))
    }

    /// Same definition as [`lcs_brute`], over the cached subsets.
    pub fn lcs(&self, x: &[f64], y: &[f64], epsilon: f64) -> usize {
        for k in (1..=x.len().min(y.len())).rev() {
            for sx in &self.subsets[x.len()][k] {
                for sy in &self.subsets[y.len()][k] {
                    if sx
                        .iter()
                        .zip(sy)
                        .all(|(&i, &j)| (x[i] - y[j]).abs() <= epsilon)
                    {
                        return k;
                    }
                }
            }
        }
        0
    }
}

/// Minimum cost over every edit script, enumerated by the suffix recursion
/// without memoization.
pub fn edr_brute(a: &[f64], b: &[f64], epsilon: f64) -> usize {
    if b.is_empty() {
        return a.len();
    }
    if a.is_empty() {
        return b.len();
    }
    let penalty = if (a[0] - b[0]).abs() < epsilon { 0 } else { 1 };
    let diag = edr_brute(&a[1..], &b[1..], epsilon) + penalty;
    let skip_b = edr_brute(a, &b[1..], epsilon) + 1;
    let skip_a = edr_brute(&a[1..], b, epsilon) + 1;
    diag.min(skip_b).min(skip_a)
}

/// All sequences of length `1..=max_len` over `grid`.
pub fn grid_sequences(grid: &[f64], max_len: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut layer: Vec<Vec<f64>> = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|s| {
                grid.iter().map(move |&v| {
                    let mut t = s.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

#[test]
fn oracle_self_checks() {
    // Delannoy numbers count the warping paths.
    assert_eq!(warping_paths(3, 3).len(), 13);
    assert_eq!(warping_paths(6, 6).len(), 1683);
    assert_eq!(grid_sequences(&[0.0, 1.0], 3).len(), 14);
    assert_eq!(
        lcs_brute(
            &[1.0, 2.0, 3.0, 2.0, 4.0, 1.0, 2.0],
            &[2.0, 4.0, 3.0, 1.0, 2.0, 1.0],
            0.0
        ),
        4
    );
    assert_eq!(edr_brute(&[1.0, 2.0, 3.0], &[1.0, 9.0, 3.0], 0.5), 1);
    assert_eq!(dtw_brute(&[1.0, 2.0, 3.0], &[1.0, 2.0, 2.0, 3.0]), 0.0);
    let t = Tables::new(4);
    assert_eq!(t.paths(3, 3).len(), 13);
    assert_eq!(t.paths(1, 4).len(), 1);
    let (x, y) = ([1.0, 2.0, 3.0, 2.0], [2.0, 4.0, 3.0]);
    assert_eq!(t.lcs(&x, &y, 0.0), lcs_brute(&x, &y, 0.0));
    assert_eq!(t.dtw(&x, &y), dtw_brute(&x, &y));
}
