mod oracles;

use dailyproxy::similarity::{
    dtw, edr, embed_as_trajectory, euclidean, hausdorff, lcs_length, lcss_distance, soft_dtw,
    Method, PointSet2D, SimilarityConfig,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GRID: [f64; 5] = [-1.0, 0.0, 0.3, 1.0, 2.0];

fn full() -> SimilarityConfig {
    SimilarityConfig::default()
}

#[test]
fn dp_measures_match_oracles_on_short_grid_sequences() {
    let seqs = oracles::grid_sequences(&GRID, 3);
    let mut paths = std::collections::HashMap::new();
    for x in &seqs {
        for y in &seqs {
            let p = paths
                .entry((x.len(), y.len()))
                .or_insert_with(|| oracles::warping_paths(x.len(), y.len()));
            let got = dtw(x, y, &full()).unwrap();
            let want = oracles::dtw_over_paths(x, y, p);
            assert!(
                (got - want).abs() <= 1e-9,
                "dtw {x:?} {y:?}: {got} vs {want}"
            );
            for eps in [0.0, 0.3, 1.0] {
                assert_eq!(lcs_length(x, y, eps), oracles::lcs_brute(x, y, eps));
                assert_eq!(edr(x, y, eps), oracles::edr_brute(x, y, eps));
            }
        }
    }
}

#[test]
fn edr_against_oracle_with_empty_inputs() {
    for x in oracles::grid_sequences(&GRID, 3) {
        assert_eq!(edr(&x, &[], 0.5), x.len());
        assert_eq!(edr(&[], &x, 0.5), oracles::edr_brute(&[], &x, 0.5));
    }
}

#[test]
fn banded_dtw_matches_restricted_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..300 {
        let m: usize = rng.random_range(1..=6);
        let n: usize = rng.random_range(1..=6);
        let x: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let band = rng.random_range(m.abs_diff(n)..=6);
        let allowed: Vec<Vec<(usize, usize)>> = oracles::warping_paths(m, n)
            .into_iter()
            .filter(|p| p.iter().all(|&(i, j)| i.abs_diff(j) <= band))
            .collect();
        let cfg = SimilarityConfig {
            band: Some(band),
            ..full()
        };
        let got = dtw(&x, &y, &cfg).unwrap();
        let want = oracles::dtw_over_paths(&x, &y, &allowed);
        assert!((got - want).abs() <= 1e-9);
    }
}

fn seq(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-3.0f64..3.0, 1..=max_len)
}

fn points() -> impl Strategy<Value = PointSet2D> {
    proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..8)
        .prop_map(|p| PointSet2D::new(p).unwrap())
}

proptest! {
    #[test]
    fn measures_are_symmetric(x in seq(10), y in seq(10), gamma in 0.01f64..10.0, eps in 0.0f64..1.5) {
        let cfg = SimilarityConfig { epsilon: eps, gamma, band: None };
        prop_assert_eq!(dtw(&x, &y, &cfg).unwrap(), dtw(&y, &x, &cfg).unwrap());
        prop_assert_eq!(soft_dtw(&x, &y, &cfg).unwrap(), soft_dtw(&y, &x, &cfg).unwrap());
        prop_assert_eq!(edr(&x, &y, eps), edr(&y, &x, eps));
        prop_assert_eq!(lcss_distance(&x, &y, eps).unwrap(), lcss_distance(&y, &x, eps).unwrap());
        if x.len() >= 2 && y.len() >= 2 {
            let (a, b) = (embed_as_trajectory(&x).unwrap(), embed_as_trajectory(&y).unwrap());
            prop_assert_eq!(hausdorff(&a, &b).unwrap(), hausdorff(&b, &a).unwrap());
        }
        if x.len() == y.len() {
            prop_assert_eq!(euclidean(&x, &y).unwrap(), euclidean(&y, &x).unwrap());
        }
    }

    #[test]
    fn identity_gives_zero(x in seq(12), eps in 0.001f64..2.0) {
        prop_assert_eq!(dtw(&x, &x, &full()).unwrap(), 0.0);
        prop_assert_eq!(edr(&x, &x, eps), 0);
        prop_assert_eq!(lcss_distance(&x, &x, 0.0).unwrap(), 0.0);
        if x.len() >= 2 {
            let a = embed_as_trajectory(&x).unwrap();
            prop_assert_eq!(hausdorff(&a, &a).unwrap(), 0.0);
        }
    }

    #[test]
    fn counts_are_bounded(x in seq(9), y in seq(9), eps in 0.0f64..2.0) {
        let (m, n) = (x.len(), y.len());
        let l = lcs_length(&x, &y, eps);
        prop_assert!(l <= m.min(n));
        let e = edr(&x, &y, eps);
        prop_assert!(e >= m.abs_diff(n) && e <= m.max(n));
    }

    #[test]
    fn soft_dtw_below_dtw_and_decreasing_in_gamma(x in seq(8), y in seq(8)) {
        let hard = dtw(&x, &y, &full()).unwrap();
        let mut last = f64::INFINITY;
        for gamma in [1e-4, 1e-2, 0.1, 1.0, 10.0] {
            let cfg = SimilarityConfig { gamma, ..full() };
            let s = soft_dtw(&x, &y, &cfg).unwrap();
            prop_assert!(s <= hard + 1e-12);
            prop_assert!(s <= last + 1e-12);
            last = s;
        }
        let near = soft_dtw(&x, &y, &SimilarityConfig { gamma: 1e-4, ..full() }).unwrap();
        prop_assert!((near - hard).abs() <= 1e-2);
    }

    #[test]
    fn hausdorff_triangle(a in points(), b in points(), c in points()) {
        let ab = hausdorff(&a, &b).unwrap();
        let bc = hausdorff(&b, &c).unwrap();
        let ac = hausdorff(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-12);
    }

    #[test]
    fn method_dispatch_matches_kernels(x in seq(8), y in seq(8)) {
        prop_assume!(x.len() >= 2 && y.len() >= 2);
        let cfg = full();
        prop_assert_eq!(Method::Dtw.distance(&x, &y, &cfg).unwrap(), dtw(&x, &y, &cfg).unwrap());
        prop_assert_eq!(Method::Edr.distance(&x, &y, &cfg).unwrap(), edr(&x, &y, cfg.epsilon) as f64);
    }
}
