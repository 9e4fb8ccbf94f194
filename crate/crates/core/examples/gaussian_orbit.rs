//! Coordinates of the Gaussian symmetry orbit and the distance of a flow to it.

use cr_core::coefficients::{build_table, BuildOptions, Family};
use cr_core::integrate::{evolve_to, Integrator};
use cr_core::stability::decay_fit;
use cr_core::subspaces::{distance_to_gaussian_orbit, orbit_gaussian, radial_state};
use cr_core::ResonantSystem;

fn main() -> cr_core::Result<()> {
    let c = orbit_gaussian(0.0, 0.0, 0.5, 1.0, 200)?;
    println!("orbit point (mu=0.5, lambda=1): c0 = {:.4}, c1 = {:.4}", c[0], c[1]);
    println!("partial mass up to n=200: {:.15}", c.iter().map(|v| v.norm_sqr()).sum::<f64>());

    let cutoff = 40;
    let point = radial_state(&c[..=(cutoff / 2) as usize], cutoff)?;
    let fit = decay_fit(&point)?;
    println!("decay fit: per-level slope {:.5} (ln|c| vs level), r^2 {:.6}", fit.per_level_slope, fit.r_squared);
    let found = distance_to_gaussian_orbit(&point);
    println!("nearest orbit parameters (not unique): nu {:.4} mu {:.4} lambda {:.4} (distance {:.1e})", found.nu, found.mu, found.lambda, found.distance);

    // radial data stays radial under the flow; measure how far it is from the orbit
    let sys = ResonantSystem::from_table(&build_table(Family::Radial, 12, BuildOptions::default())?)?;
    let start = radial_state(&orbit_gaussian(0.0, 0.0, 0.3, 1.2, 6)?, 12)?;
    println!("t = 0.0: distance to orbit {:.3e}", distance_to_gaussian_orbit(&start).distance);
    for t in [0.5, 1.0, 2.0] {
        let s = evolve_to(&start, &sys, t, Integrator::Rk4 { step: 1e-3 })?;
        println!("t = {t:3.1}: distance to orbit {:.3e}", distance_to_gaussian_orbit(&s).distance);
    }
    Ok(())
}
