use pbench_core::geometry::Point;
use pbench_core::stats::{
    click_density, composition_modes, fit_elevation, fit_trend, kde, ttest_independent,
    FigureAnnotation, OffsetMode,
};
use proptest::prelude::*;

// Reference values computed with mpmath at 40 significant digits, both via
// the regularized incomplete beta function and by direct quadrature of the
// Student t density.
#[allow(clippy::excessive_precision)]
const REF_123_234: (f64, f64) = (-1.2247448713915890491, 0.287864134726690662);
#[allow(clippy::excessive_precision)]
const REF_MIXED: (f64, f64) = (-2.3042861179277055073, 0.08254901919932847359);

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn ttest_against_high_precision_reference() {
    let r = ttest_independent(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]).unwrap();
    assert_eq!(r.df, 4);
    assert!(rel(r.t, REF_123_234.0) < 1e-12);
    assert!(rel(r.p, REF_123_234.1) < 1e-10);

    let r = ttest_independent(&[1.2, 3.4, 2.9], &[4.1, 5.6, 3.8]).unwrap();
    assert!(rel(r.t, REF_MIXED.0) < 1e-12);
    assert!(rel(r.p, REF_MIXED.1) < 1e-10);
}

fn sample() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-50.0f64..50.0, 2..30)
}

proptest! {
    #[test]
    fn ttest_antisymmetry(a in sample(), b in sample()) {
        let ab = ttest_independent(&a, &b).unwrap();
        let ba = ttest_independent(&b, &a).unwrap();
        prop_assert_eq!(ab.t, -ba.t);
        prop_assert_eq!(ab.p, ba.p);
    }

    #[test]
    fn ttest_shift_and_scale(a in sample(), b in sample(), shift in -10.0f64..10.0, scale in 0.1f64..10.0) {
        let base = ttest_independent(&a, &b).unwrap().t;
        let sa: Vec<f64> = a.iter().map(|x| x + shift).collect();
        let sb: Vec<f64> = b.iter().map(|x| x + shift).collect();
        let shifted = ttest_independent(&sa, &sb).unwrap().t;
        prop_assert!((shifted - base).abs() <= 1e-12 * base.abs().max(1.0));
        let ka: Vec<f64> = a.iter().map(|x| x * scale).collect();
        let kb: Vec<f64> = b.iter().map(|x| x * scale).collect();
        let scaled = ttest_independent(&ka, &kb).unwrap().t;
        prop_assert!((scaled - base).abs() <= 1e-12 * base.abs().max(1.0));
    }

    #[test]
    fn density_is_additive_and_order_free(
        clicks in proptest::collection::vec((0.0f64..80.0, 0.0f64..60.0), 0..12),
        split in 0usize..12,
    ) {
        let pts: Vec<Point> = clicks.iter().map(|&(x, y)| Point::new(x, y)).collect();
        let split = split.min(pts.len());
        let all = click_density(&pts, 80, 60, 7.5).unwrap();
        let a = click_density(&pts[..split], 80, 60, 7.5).unwrap();
        let b = click_density(&pts[split..], 80, 60, 7.5).unwrap();
        for i in 0..all.cells.len() {
            prop_assert_eq!(all.cells[i], a.cells[i] + b.cells[i]);
        }
        let mut rev = pts.clone();
        rev.reverse();
        prop_assert_eq!(click_density(&rev, 80, 60, 7.5).unwrap(), all);
    }

    #[test]
    fn modes_translate_with_data(xs in proptest::collection::vec(0.0f64..600.0, 1..40), delta in -300.0f64..300.0) {
        let h = 12.0;
        let m = composition_modes(&xs, h).unwrap();
        let shifted: Vec<f64> = xs.iter().map(|x| x + delta).collect();
        let ms = composition_modes(&shifted, h).unwrap();
        prop_assert_eq!(m.len(), ms.len());
        for (a, b) in m.iter().zip(&ms) {
            prop_assert!((a.x + delta - b.x).abs() < 1e-6 * h);
        }
    }

    #[test]
    fn elevation_is_scale_equivariant(
        figs in proptest::collection::vec((100.0f64..500.0, 5.0f64..80.0), 2..15),
        horizon in 0.0f64..200.0,
        c in 0.1f64..10.0,
    ) {
        let mk = |k: f64| -> Vec<FigureAnnotation> {
            figs.iter().map(|&(foot, size)| FigureAnnotation {
                image_name: "i".into(),
                annotator: "a".into(),
                foot_x: 0.0,
                foot_y: foot * k,
                head_x: 0.0,
                head_y: (foot - size) * k,
            }).collect()
        };
        let a = fit_elevation(&mk(1.0), horizon, OffsetMode::ThroughOrigin).unwrap();
        let b = fit_elevation(&mk(c), horizon * c, OffsetMode::ThroughOrigin).unwrap();
        prop_assert!((a.h - b.h).abs() <= 1e-12 * a.h.abs().max(1.0));
    }

    #[test]
    fn trend_recovers_exact_lines(slope in -5.0f64..5.0, intercept in -100.0f64..100.0, n in 3usize..60) {
        let years: Vec<f64> = (0..n).map(|i| 1600.0 + 1.7 * i as f64).collect();
        let y: Vec<f64> = years.iter().map(|x| slope * x + intercept).collect();
        let r = fit_trend(&years, &y).unwrap();
        prop_assert!((r.slope - slope).abs() <= 1e-12 * slope.abs().max(1.0) * 10.0);
        prop_assert_eq!(r.df as usize, n - 2);
    }
}

#[test]
fn trend_matches_normal_equations_oracle() {
    // Noisy data; oracle solves the 2×2 normal equations by Cramer's rule.
    let x: Vec<f64> = (0..34).map(|i| i as f64).collect();
    let noise = [
        0.3, -0.1, 0.25, -0.4, 0.05, 0.12, -0.33, 0.2, 0.0, -0.07, 0.41,
    ];
    let y: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(i, xi)| 3.0 - 0.1 * xi + noise[i % noise.len()])
        .collect();
    let n = x.len() as f64;
    let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
    let det = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / det;
    let intercept = (sxx * sy - sx * sxy) / det;

    let r = fit_trend(&x, &y).unwrap();
    assert!((r.slope - slope).abs() < 1e-10);
    assert!((r.intercept - intercept).abs() < 1e-10);
    assert_eq!(r.df, 32);
}

#[test]
fn two_clusters_found_by_dense_grid() {
    let left: Vec<f64> = (0..15).map(|i| 100.0 + (i as f64 - 7.0) * 0.8).collect();
    let right: Vec<f64> = (0..10).map(|i| 400.0 + (i as f64 - 4.5) * 1.1).collect();
    let xs: Vec<f64> = left.iter().chain(&right).copied().collect();
    let h = 12.0;
    let modes = composition_modes(&xs, h).unwrap();
    assert_eq!(modes.len(), 2);

    // Oracle: local maxima of the KDE on a 0.01 px grid.
    let grid: Vec<(f64, f64)> = (0..60_000)
        .map(|i| {
            let x = i as f64 * 0.01;
            (x, kde(&xs, h, x))
        })
        .collect();
    let mut peaks: Vec<(f64, f64)> = grid
        .windows(3)
        .filter(|w| w[1].1 > w[0].1 && w[1].1 > w[2].1)
        .map(|w| w[1])
        .collect();
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
    assert_eq!(peaks.len(), 2);
    for (m, p) in modes.iter().zip(&peaks) {
        assert!((m.x - p.0).abs() < 0.02);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!((modes[0].x - mean(&left)).abs() < h / 10.0);
    assert!((modes[1].x - mean(&right)).abs() < h / 10.0);
}
