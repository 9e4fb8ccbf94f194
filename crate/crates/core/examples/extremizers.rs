//! Constrained extremizers of the Hamiltonian on the level n = 2.
//!
//! With the mass fixed the maximizer is the catalogue wave (f); fixing the
//! momentum to zero as well, the minimizer is wave (e).

use cr_core::coefficients::{build_table, BuildOptions, Family};
use cr_core::stability::{find_stationary, Constraint, FindOptions, Sense};
use cr_core::subspaces::e2_modes;
use cr_core::ResonantSystem;

fn main() -> cr_core::Result<()> {
    let system = ResonantSystem::from_table(&build_table(Family::General2d, 2, BuildOptions::default())?)?;
    let opts = FindOptions { support: Some(e2_modes().to_vec()), ..FindOptions::default() };
    let runs = [
        ("max, M = 1", Constraint::Mass { mu0: 1.0 }, Sense::Max),
        ("min, M = 1, P = 0", Constraint::MassAndMomentum { mu0: 1.0, p0: 0.0 }, Sense::Min),
        ("min, M = 1", Constraint::Mass { mu0: 1.0 }, Sense::Min),
    ];
    for (label, constraint, sense) in runs {
        println!("{label}");
        for seed in 0..3 {
            let w = find_stationary(&system, constraint, sense, seed, &opts)?;
            let moduli = e2_modes().map(|q| w.profile.get(q).norm_sqr());
            println!(
                "  seed {seed}: E = {:.10}  |d|^2 = ({:.6}, {:.6}, {:.6})  omega {:.6}  residual {:.1e}",
                system.hamiltonian(&w.profile)?,
                moduli[0],
                moduli[1],
                moduli[2],
                w.omega,
                w.el_residual(&system)?
            );
        }
    }
    println!("(e): |d|^2 = (2/9, 5/9, 2/9) = ({:.6}, {:.6}, {:.6})", 2.0 / 9.0, 5.0 / 9.0, 2.0 / 9.0);
    println!("(f): |d|^2 = (2/7, 3/7, 2/7) = ({:.6}, {:.6}, {:.6})", 2.0 / 7.0, 3.0 / 7.0, 2.0 / 7.0);
    Ok(())
}
