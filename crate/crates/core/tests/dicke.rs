use proptest::prelude::*;
use qpt_core::dicke::*;
use qpt_core::linalg::{eigvalsh_dense, lanczos_ground, LanczosOptions};

fn p(l: f64) -> DickeParams {
    DickeParams::new(1.0, 1.0, l).unwrap()
}

#[test]
fn soft_gap_monotone_on_both_sides() {
    let grid: Vec<f64> = (0..=200).map(|k| k as f64 * 1.0 / 200.0).collect();
    for w in grid.windows(2) {
        let (a, b) = (mode_energies(&p(w[0])).e1, mode_energies(&p(w[1])).e1);
        if w[1] <= 0.5 {
            assert!(b < a, "λ = {}", w[1]);
        } else if w[0] >= 0.5 {
            assert!(b > a, "λ = {}", w[1]);
        }
    }
    assert!(mode_energies(&p(0.5)).e2 > 0.0);
}

#[test]
fn spectrum_invariants_off_resonance() {
    for (w, w0) in [(1.0, 1.0), (2.0, 0.5), (0.3, 1.7)] {
        let lc = critical_coupling(w, w0).unwrap();
        for f in [0.1, 0.5, 0.99, 1.01, 1.5, 2.0] {
            let s = mode_energies(&DickeParams::new(w, w0, f * lc).unwrap());
            assert!(s.e1 >= 0.0 && s.e1 < s.e2);
            if let Some(mu) = s.mu {
                assert!(mu > 0.0 && mu < 1.0);
            }
        }
    }
}

#[test]
fn eta_invariance_of_gaussian_fidelity() {
    for eta in [0.1, 0.5, 2.0] {
        for phase in [Phase::Normal, Phase::SuperRadiant] {
            let mut devs = Vec::new();
            let law = fidelity_scaling(eta).unwrap();
            for scale in [1e-2, 1e-3, 1e-4] {
                let (l1, l2) = pair_for_eta(0.5, eta, scale * 0.5, phase).unwrap();
                let f = fidelity_gaussian(&p(l1), &p(l2), RotationMode::PerCoupling).unwrap();
                devs.push((f - law).abs());
            }
            let (l1, l2) = pair_for_eta(0.5, eta, 1e-2 * 0.5, phase).unwrap();
            let (k1, k2) = pair_for_eta(0.5, eta, 1e-3 * 0.5, phase).unwrap();
            let a = fidelity_gaussian(&p(l1), &p(l2), RotationMode::PerCoupling).unwrap();
            let b = fidelity_gaussian(&p(k1), &p(k2), RotationMode::PerCoupling).unwrap();
            assert!((a - b).abs() <= 1e-3, "η = {eta}, {phase}");
            assert!(
                devs.windows(2).all(|w| w[1] < w[0]),
                "η = {eta}, {phase}: {devs:?}"
            );
        }
    }
}

#[test]
fn shared_rotation_near_critical() {
    let (l1, l2) = pair_for_eta(0.5, 0.1, 1e-4, Phase::Normal).unwrap();
    let f = fidelity_gaussian(&p(l1), &p(l2), RotationMode::Shared).unwrap();
    assert!((f - fidelity_scaling(0.1).unwrap()).abs() < 1e-3);
}

#[test]
fn off_resonance_gap_tracks_near_critical_formula() {
    let params = DickeParams::new(2.0, 0.5, 0.0).unwrap();
    let lc = params.lambda_c();
    for d in [1e-3, 1e-5] {
        let q = params.with_lambda(lc * (1.0 - d)).unwrap();
        let exact = mode_energies(&q).e1;
        let approx = near_critical_gap(&q).unwrap();
        assert!((exact / approx - 1.0).abs() < 10.0 * d);
    }
}

#[test]
fn soft_mode_map_near_critical() {
    let (l1, l2) = pair_for_eta(0.5, 0.1, 1e-6, Phase::Normal).unwrap();
    let map = soft_mode_map(&p(l1), &p(l2)).unwrap();
    let s = 0.1f64.sqrt();
    assert!((map.tanh() - (s - 1.0) / (s + 1.0)).abs() < 1e-6);
}

proptest! {
    #[test]
    fn gaussian_fidelity_symmetric(a in 0.0f64..0.499, b in 0.0f64..0.499, w in 0.3f64..3.0, w0 in 0.3f64..3.0) {
        let lc = critical_coupling(w, w0).unwrap();
        for (x, y) in [(a * 2.0 * lc, b * 2.0 * lc), ((1.0 + 2.0 * a) * lc + 1e-9, (1.0 + 2.0 * b) * lc + 1e-9)] {
            let (p1, p2) = (DickeParams::new(w, w0, x).unwrap(), DickeParams::new(w, w0, y).unwrap());
            let f = fidelity_gaussian(&p1, &p2, RotationMode::PerCoupling).unwrap();
            let g = fidelity_gaussian(&p2, &p1, RotationMode::PerCoupling).unwrap();
            prop_assert!((f - g).abs() <= 1e-12);
            prop_assert!(f > 0.0 && f <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn scaling_duality(log_eta in -4.0f64..0.0) {
        let eta = 10f64.powf(log_eta);
        prop_assert!((fidelity_scaling(eta).unwrap() - fidelity_scaling(1.0 / eta).unwrap()).abs() <= 1e-12);
    }
}

fn solver() -> SolverOptions {
    SolverOptions::default()
}

#[test]
fn lanczos_decoupled_dicke() {
    let spec = TruncatedDicke::new(2, 6, p(0.0)).unwrap();
    let h = build_hamiltonian(&spec).unwrap();
    let r = lanczos_ground(&h, 1e-12, &LanczosOptions::default()).unwrap();
    assert!((r.energy + 1.0).abs() < 1e-12);
}

#[test]
fn cutoff_convergence_single_atom() {
    let e = |nb| {
        ground_state_exact(&TruncatedDicke::new(1, nb, p(0.45)).unwrap(), &solver())
            .unwrap()
            .energy
    };
    assert!((e(64) - e(128)).abs() <= 1e-8);
}

#[test]
fn energy_never_rises_with_cutoff() {
    for lambda in [0.3, 0.45, 0.6] {
        let mut last = f64::INFINITY;
        for nb in [4, 8, 12, 16, 24, 32] {
            let e = ground_state_exact(&TruncatedDicke::new(6, nb, p(lambda)).unwrap(), &solver())
                .unwrap()
                .energy;
            assert!(e <= last + 1e-12, "λ = {lambda}, n_b = {nb}");
            last = e;
        }
    }
}

#[test]
fn dense_and_lanczos_ground_states_agree() {
    let spec = TruncatedDicke::new(8, 32, p(0.45)).unwrap();
    let dense = ground_state_exact(&spec, &solver()).unwrap();
    let sparse = ground_state_exact(
        &spec,
        &SolverOptions {
            dense_threshold: 10,
            ..solver()
        },
    )
    .unwrap();
    assert!((dense.energy - sparse.energy).abs() <= 1e-8);
    let overlap: f64 = dense
        .vector
        .iter()
        .zip(&sparse.vector)
        .map(|(a, b)| a * b)
        .sum();
    assert!((overlap - 1.0).abs() < 1e-8);
}

#[test]
fn even_sector_holds_ground_state() {
    let spec = TruncatedDicke::new(6, 20, p(0.45)).unwrap();
    let full = eigvalsh_dense(&build_hamiltonian(&spec).unwrap(), 4096).unwrap()[0];
    let g = ground_state_exact(&spec, &solver()).unwrap();
    assert!((g.energy - full).abs() < 1e-10);
    assert_eq!(g.parity, Parity::Even);
    let pivot = g
        .vector
        .iter()
        .copied()
        .fold(0.0f64, |b, x| if x.abs() > b.abs() { x } else { b });
    assert!(pivot > 0.0);
}

#[test]
fn super_radiant_ground_state_is_lowest_overall() {
    let spec = TruncatedDicke::new(6, 30, p(0.7)).unwrap();
    let full = eigvalsh_dense(&build_hamiltonian(&spec).unwrap(), 4096).unwrap()[0];
    let g = ground_state_exact(&spec, &solver()).unwrap();
    assert!((g.energy - full).abs() < 1e-10);
}

#[test]
fn exact_fidelity_edges() {
    assert_eq!(
        fidelity_exact(&p(0.0), 4, 8, 0.3, 0.3, &solver()).unwrap(),
        1.0
    );
    let f = fidelity_exact(&p(0.0), 16, 16, 0.495, 0.45, &solver()).unwrap();
    assert!(f > 0.9 && f <= 1.0);
}

#[test]
fn convergence_degenerate_pair() {
    let s = convergence_d(
        &p(0.0),
        0.4,
        0.4,
        &[2, 4, 8],
        CutoffRule::default(),
        &solver(),
    )
    .unwrap();
    assert!(s.entries.iter().all(|e| e.d == 0.0 && e.lp_exact == 1.0));
}

#[test]
fn convergence_requires_ascending_n() {
    assert!(convergence_d(
        &p(0.0),
        0.495,
        0.45,
        &[8, 4],
        CutoffRule::default(),
        &solver()
    )
    .is_err());
}

#[test]
fn cutoff_doubling_is_minor() {
    let n_list = [8, 16];
    let a = convergence_d(
        &p(0.0),
        0.495,
        0.45,
        &n_list,
        CutoffRule::Proportional(1),
        &solver(),
    )
    .unwrap();
    let b = convergence_d(
        &p(0.0),
        0.495,
        0.45,
        &n_list,
        CutoffRule::Proportional(2),
        &solver(),
    )
    .unwrap();
    let step = a.entries[0].d - a.entries[1].d;
    for (x, y) in a.entries.iter().zip(&b.entries) {
        assert!((x.d - y.d).abs() < step);
    }
}

#[test]
fn exact_echo_basics() {
    let t: Vec<f64> = (0..=50).map(|k| 0.2 * k as f64).collect();
    let s = echo_exact(&p(0.0), 8, 16, 0.45, 0.45, &t, &solver()).unwrap();
    assert!(s.m().iter().all(|m| (m - 1.0).abs() < 1e-10));
    let s = echo_exact(&p(0.0), 8, 16, 0.45, 0.3, &t, &solver()).unwrap();
    assert!((s.m()[0] - 1.0).abs() < 1e-12);
    assert!(s.m().iter().all(|&m| (0.0..=1.0 + 1e-10).contains(&m)));
    let e1 = mode_energies(&p(0.45)).e1;
    for (tau, t) in s.tau().iter().zip(s.t()) {
        assert_eq!(*tau, e1 * t);
    }
}

#[test]
fn exact_echo_first_minimum() {
    // The echo has period π/e1(λ1), so its first minimum sits at π/(2 e1).
    let e1 = mode_energies(&p(0.4)).e1;
    let t: Vec<f64> = (0..=800)
        .map(|k| k as f64 * std::f64::consts::PI / e1 / 800.0)
        .collect();
    for n in [32, 64] {
        let s = echo_exact(&p(0.0), n, n, 0.4, 0.0, &t, &solver()).unwrap();
        let (k, _) = s
            .m()
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let expected = std::f64::consts::FRAC_PI_2 / e1;
        assert!(
            (t[k] / expected - 1.0).abs() < 0.1,
            "N = {n}: minimum at {} vs {expected}",
            t[k]
        );
    }
}
