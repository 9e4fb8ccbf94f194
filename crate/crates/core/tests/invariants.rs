use std::f64::consts::PI;
use std::sync::OnceLock;

use proptest::prelude::*;

use cr_core::basis::ModeIndex;
use cr_core::coefficients::{build_table, load_table, save_table, BuildOptions, CouplingTable, Family};
use cr_core::integrate::{evolve, EvolveOptions};
use cr_core::nls::hs_norm;
use cr_core::resonant::{fourier_map, h_flow_map, phase_map, rotation_map, supported_on, ResonantSystem};
use cr_core::stability::discriminant;
use cr_core::state::{mode_count, modes, SpectralState};
use cr_core::C64;

const CUTOFF: u32 = 4;

fn system() -> &'static ResonantSystem {
    static SYS: OnceLock<ResonantSystem> = OnceLock::new();
    SYS.get_or_init(|| {
        let t = build_table(Family::General2d, CUTOFF, BuildOptions::default()).unwrap();
        ResonantSystem::from_table(&t).unwrap()
    })
}

fn state_strategy(cutoff: u32) -> impl Strategy<Value = SpectralState> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), mode_count(cutoff)).prop_map(move |v| {
        let coeffs = v.into_iter().map(|(a, b)| C64::new(a, b)).collect();
        SpectralState::from_coeffs(cutoff, coeffs).unwrap()
    })
}

fn restricted(s: &SpectralState, keep: impl Fn(ModeIndex) -> bool) -> SpectralState {
    let mut out = s.clone();
    out.map_by_mode(|q| C64::new(if keep(q) { 1.0 } else { 0.0 }, 0.0));
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn symmetries_commute_with_nonlinearity(u in state_strategy(CUTOFF), lam in -3.0f64..3.0) {
        let sys = system();
        let tu = sys.nonlinearity(&u).unwrap();
        let maps: [Box<dyn Fn(&SpectralState) -> SpectralState>; 4] = [
            Box::new(fourier_map),
            Box::new(move |s| phase_map(s, lam)),
            Box::new(move |s| rotation_map(s, lam)),
            Box::new(move |s| h_flow_map(s, lam)),
        ];
        for g in &maps {
            let d = g(&tu).distance(&sys.nonlinearity(&g(&u)).unwrap());
            prop_assert!(d < 1e-12, "{}", d);
        }
    }

    #[test]
    fn flow_conserves_invariants(u in state_strategy(3)) {
        let t = build_table(Family::General2d, 3, BuildOptions::default()).unwrap();
        let sys = ResonantSystem::from_table(&t).unwrap();
        let u = u.scaled(C64::new(1.0 / u.norm().max(1e-3), 0.0));
        let traj = evolve(&u, &sys, 0.5, EvolveOptions::rk4(1e-3).with_stride(50)).unwrap();
        prop_assert!(traj.relative_drift(|c| c.mass) < 1e-10);
        prop_assert!(traj.relative_drift(|c| c.h_expect) < 1e-10);
        let p0 = traj.samples[0].conserved.momentum;
        let pmax = traj.samples.iter().map(|s| (s.conserved.momentum - p0).abs()).fold(0.0, f64::max);
        prop_assert!(pmax < 1e-10);
        prop_assert!(traj.relative_drift(|c| c.hamiltonian) < 1e-9);
    }

    #[test]
    fn nonlinearity_is_half_the_wirtinger_gradient(u in state_strategy(3), k in 0usize..10) {
        let t = build_table(Family::General2d, 3, BuildOptions::default()).unwrap();
        let sys = ResonantSystem::from_table(&t).unwrap();
        let h = 1e-5;
        let e = |d: C64| {
            let mut v = u.clone();
            v.coeffs_mut()[k] += d;
            sys.hamiltonian(&v).unwrap()
        };
        let dx = (e(C64::new(h, 0.0)) - e(C64::new(-h, 0.0))) / (2.0 * h);
        let dy = (e(C64::new(0.0, h)) - e(C64::new(0.0, -h))) / (2.0 * h);
        let grad = C64::new(dx, dy) * 0.25;
        let tk = sys.nonlinearity(&u).unwrap().coeffs()[k];
        prop_assert!((grad - tk).norm() < 1e-7 * (1.0 + tk.norm()));
    }

    #[test]
    fn invariant_subspaces_are_preserved(u in state_strategy(CUTOFF), level in 0u32..=CUTOFF) {
        let sys = system();
        let cases: [(SpectralState, i64, i64, i64); 4] = [
            (restricted(&u, |q| q.n() == level), 1, 0, level as i64),
            (restricted(&u, |q| q.n() as i32 == q.m()), 1, -1, 0),
            (restricted(&u, |q| q.n() as i32 == -q.m()), 1, 1, 0),
            (restricted(&u, |q| q.m() == 0), 0, 1, 0),
        ];
        for (s, bn, bm, g) in &cases {
            let out = sys.nonlinearity(s).unwrap();
            prop_assert!(supported_on(&out, *bn, *bm, *g, 1e-13));
        }
    }

    #[test]
    fn hs_norm_is_homogeneous_and_monotone(u in state_strategy(3), b in 0.0f64..4.0, s in 0.0f64..3.0) {
        let scaled = u.scaled(C64::new(b, 0.0));
        prop_assert!((hs_norm(&scaled, s) - b * hs_norm(&u, s)).abs() < 1e-12 * (1.0 + b * hs_norm(&u, s)));
        prop_assert!(hs_norm(&u, s + 0.5) >= hs_norm(&u, s));
    }

    #[test]
    fn discriminant_is_symmetric(n in 1u32..60, k in 0u32..120) {
        let k = k % (2 * n + 1);
        prop_assume!(k != n);
        let (a, b) = (discriminant(n, k), discriminant(n, 2 * n - k));
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300));
    }
}

#[test]
fn energy_of_pure_modes_is_the_diagonal_coefficient() {
    let sys = system();
    let t = build_table(Family::General2d, CUTOFF, BuildOptions::default()).unwrap();
    for q in modes(CUTOFF) {
        let s = SpectralState::pure(q, CUTOFF, C64::new(1.0, 0.0)).unwrap();
        assert!((sys.hamiltonian(&s).unwrap() - t.get(q, q, q, q)).abs() < 1e-14);
    }
    let g = SpectralState::pure(ModeIndex::new(0, 0).unwrap(), CUTOFF, C64::new(1.0, 0.0)).unwrap();
    assert!((sys.hamiltonian(&g).unwrap() - PI / 2.0).abs() < 1e-12);
}

#[test]
fn tables_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    for (family, cutoff) in [(Family::Lll, 6), (Family::Radial, 6), (Family::General2d, 3), (Family::FullProduct, 2)] {
        let t: CouplingTable = build_table(family, cutoff, BuildOptions::default()).unwrap();
        let path = dir.path().join(format!("{family}.crt"));
        save_table(&t, &path).unwrap();
        assert_eq!(load_table(&path).unwrap(), t);
    }
}
