//! The three-mode system on the level n = 2: catalogue waves and the reduced flow.

use cr_core::coefficients::{build_table, BuildOptions, Family};
use cr_core::integrate::{evolve, EvolveOptions};
use cr_core::subspaces::{catalogue_examples, e2_modes, e2_reduced_rhs, evolve_e2, E2State, ReducedE2State};
use cr_core::{ResonantSystem, C64};

fn main() -> cr_core::Result<()> {
    let system = ResonantSystem::from_table(&build_table(Family::General2d, 2, BuildOptions::default())?)?;

    println!("wave  omega        rot_rate     EL residual  max modulus drift (t <= 10)");
    for w in catalogue_examples() {
        let traj = evolve(&w.profile, &system, 10.0, EvolveOptions::rk4(1e-3).with_stride(100))?;
        let drift = traj
            .samples
            .iter()
            .flat_map(|s| e2_modes().map(|q| (s.state.get(q).norm() - w.profile.get(q).norm()).abs()))
            .fold(0.0, f64::max);
        println!("{:<5} {:+.6e} {:+.6e} {:.2e}     {drift:.2e}", format!("{:?}", w.kind), w.omega, w.rot_rate, w.el_residual(&system)?);
    }

    // a generic orbit in the gauged variables and its reduced coordinates (c, xi)
    let d = E2State::new(C64::new(0.5, 0.1), C64::new(0.6, -0.2), C64::new(0.3, 0.4));
    println!("\n   tau      |d2|^2    |d0|^2    |d-2|^2   c         xi");
    let mut s = d;
    for _ in 0..8 {
        let r = ReducedE2State::from_e2(&s);
        let a = s.as_array();
        println!("{:6.3}  {:.6}  {:.6}  {:.6}  {:+.5}  {:+.5}", s.tau, a[0].norm_sqr(), a[1].norm_sqr(), a[2].norm_sqr(), r.c, r.xi);
        s = evolve_e2(&s, s.tau + 0.25, 1e-4)?;
    }
    let r = ReducedE2State::from_e2(&s);
    let (cdot, xidot) = e2_reduced_rhs(&r)?;
    println!("reduced vector field at the end point: c' = {cdot:+.5}, xi' = {xidot:+.5}");
    Ok(())
}
