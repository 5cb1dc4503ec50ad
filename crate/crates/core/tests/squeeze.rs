use proptest::prelude::*;
use qpt_core::squeeze::{
    expansion_order_for, fidelity, ground_expansion, overlap_matrix, participation_ratio,
    relative_map, SqueezeMap,
};

/// Harmonic-oscillator eigenfunctions of width `sigma` at `x`, orders `0..=n`.
fn hermite_functions(n: usize, sigma: f64, x: f64) -> Vec<f64> {
    let y = x / sigma;
    let mut out = vec![0.0; n + 1];
    out[0] = std::f64::consts::PI.powf(-0.25) * (-0.5 * y * y).exp() / sigma.sqrt();
    if n > 0 {
        out[1] = std::f64::consts::SQRT_2 * y * out[0];
    }
    for k in 1..n {
        out[k + 1] = ((2.0 / (k + 1) as f64).sqrt() * y * out[k])
            - ((k as f64 / (k + 1) as f64).sqrt() * out[k - 1]);
    }
    out
}

/// `|<n_1|m_2>|` by trapezoidal quadrature, with basis 2 wider by `e^r`.
fn quadrature_overlaps(r: f64, n: usize) -> Vec<Vec<f64>> {
    let (s1, s2) = (1.0f64, r.exp());
    let half_width = 14.0 * s1.max(s2);
    let points = 20_001;
    let h = 2.0 * half_width / (points - 1) as f64;
    let mut acc = vec![vec![0.0; n + 1]; n + 1];
    for k in 0..points {
        let x = -half_width + h * k as f64;
        let (a, b) = (hermite_functions(n, s1, x), hermite_functions(n, s2, x));
        for i in 0..=n {
            for j in 0..=n {
                acc[i][j] += h * a[i] * b[j];
            }
        }
    }
    acc.iter()
        .map(|row| row.iter().map(|v| v.abs()).collect())
        .collect()
}

#[test]
fn overlaps_match_wavefunction_quadrature() {
    for r in [-0.7, -0.2, 0.15, 0.5, 0.9] {
        let map = SqueezeMap::from_r(r).unwrap();
        let c = overlap_matrix(&map, 10).unwrap();
        let oracle = quadrature_overlaps(r, 10);
        for n in 0..=10 {
            for m in 0..=10 {
                assert!(
                    (c.get(n, m) - oracle[n][m]).abs() < 1e-10,
                    "r = {r}, ({n}, {m}): {} vs {}",
                    c.get(n, m),
                    oracle[n][m]
                );
            }
        }
    }
}

#[test]
fn identity_overlap() {
    let c = overlap_matrix(&SqueezeMap::identity(), 6).unwrap();
    for n in 0..=6 {
        for m in 0..=6 {
            assert_eq!(c.get(n, m), if n == m { 1.0 } else { 0.0 });
        }
    }
}

#[test]
fn column_zero_values() {
    let c = overlap_matrix(&SqueezeMap::from_tanh(0.5).unwrap(), 8).unwrap();
    let col = c.column(0);
    assert!((col[0] - 0.93060486).abs() < 1e-8);
    assert!((col[2] - 0.32901850).abs() < 1e-8);
    assert!((col[4] - 0.14246919).abs() < 1e-8);
}

#[test]
fn unconverged_column_errors() {
    let c = overlap_matrix(&SqueezeMap::from_tanh(0.9).unwrap(), 10).unwrap();
    let err = c.converged_column(3, 1e-10).unwrap_err();
    assert!(err.to_string().contains("column 3"));
}

#[test]
fn chi_grows_with_squeeze() {
    let mut last = 1.0;
    for k in 1..=20 {
        let map = SqueezeMap::from_r(0.1 * k as f64).unwrap();
        let n = 2 * expansion_order_for(&map, 1e-13).unwrap() + 2;
        let chi = participation_ratio(&map, 0, n).unwrap();
        assert!(chi > last, "r = {}: {chi} <= {last}", 0.1 * k as f64);
        last = chi;
    }
}

#[test]
fn scaling_identity() {
    for eta in [1e-4f64, 1e-2, 0.1, 0.5, 3.0] {
        let s = eta.sqrt();
        let map = SqueezeMap::from_tanh((s - 1.0) / (s + 1.0)).unwrap();
        let law = qpt_core::dicke::fidelity_scaling(eta).unwrap();
        assert!((fidelity(&map) - law).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn bogoliubov_normalization(t1 in -15.0f64..15.0, t2 in -15.0f64..15.0) {
        let m = relative_map(t1, t2).unwrap();
        prop_assert_eq!(m.r(), (t2 - t1) / 2.0);
        prop_assert!(m.p11() >= 1.0);
        let (p, q) = (m.p11(), m.q11());
        prop_assert!(((p - q) * (p + q) - 1.0).abs() <= 1e-12 * p * p);
        prop_assert_eq!(m.theta_c(), 0.0);
        prop_assert_eq!(m.theta_r(), 0.0);
    }

    #[test]
    fn parity_selection(r in -2.0f64..2.0) {
        let c = overlap_matrix(&SqueezeMap::from_r(r).unwrap(), 24).unwrap();
        for n in 0..=24 {
            for m in 0..=24 {
                if (n + m) % 2 == 1 {
                    prop_assert_eq!(c.get(n, m), 0.0);
                }
            }
        }
    }

    #[test]
    fn metric_quantities_even_in_r(r in -1.5f64..1.5) {
        let (a, b) = (SqueezeMap::from_r(r).unwrap(), SqueezeMap::from_r(-r).unwrap());
        prop_assert_eq!(fidelity(&a), fidelity(&b));
        let (ca, cb) = (overlap_matrix(&a, 30).unwrap(), overlap_matrix(&b, 30).unwrap());
        for n in 0..=30 {
            for m in 0..=30 {
                prop_assert!((ca.get(n, m) - cb.get(n, m)).abs() <= 1e-13);
            }
        }
    }

    #[test]
    fn fidelity_is_first_overlap(r in -5.0f64..5.0) {
        let map = SqueezeMap::from_r(r).unwrap();
        let c = overlap_matrix(&map, 4).unwrap();
        let g = ground_expansion(&map, 4).unwrap();
        prop_assert!((fidelity(&map) - c.get(0, 0)).abs() <= 1e-12);
        prop_assert!((fidelity(&map) - g.amplitudes()[0].abs()).abs() <= 1e-12);
    }

    #[test]
    fn expansion_invariants(q in -0.97f64..0.97) {
        let map = SqueezeMap::from_tanh(q).unwrap();
        let n = expansion_order_for(&map, 1e-13).unwrap();
        let g = ground_expansion(&map, n).unwrap();
        let sum = g.norm_sqr();
        prop_assert!(sum <= 1.0 + 1e-12 && sum >= 1.0 - g.tail_bound() - 1e-12);
        for (k, a) in g.amplitudes().iter().enumerate() {
            if q != 0.0 && *a != 0.0 {
                prop_assert_eq!(a.signum(), q.signum().powi(k as i32));
            }
        }
        let c = overlap_matrix(&map, n).unwrap();
        for (k, a) in g.amplitudes().iter().enumerate().take(n / 2 + 1) {
            prop_assert!((c.get(2 * k, 0) - a.abs()).abs() <= 1e-12);
        }
    }

    #[test]
    fn columns_complete(q in -0.8f64..0.8) {
        let map = SqueezeMap::from_tanh(q).unwrap();
        let n = 2 * expansion_order_for(&map, 1e-14).unwrap() + 40;
        let c = overlap_matrix(&map, n).unwrap();
        for m in 0..=4 {
            let s = c.column_norm_sqr(m);
            prop_assert!((1.0 - 1e-10..=1.0 + 1e-10).contains(&s), "column {} sums to {}", m, s);
        }
    }
}
