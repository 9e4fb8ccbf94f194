//! Evolve random data under the resonant system and watch the conserved quantities.
//!
//! Prints a short table and writes the full trajectory CSV to the temp directory.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use cr_core::coefficients::{build_table, BuildOptions, Family};
use cr_core::integrate::{evolve, EvolveOptions};
use cr_core::state::{mode_count, SpectralState};
use cr_core::{ResonantSystem, C64};

fn main() -> cr_core::Result<()> {
    let cutoff = 6;
    let table = build_table(Family::General2d, cutoff, BuildOptions::default())?;
    let system = ResonantSystem::from_table(&table)?;
    println!("cutoff {cutoff}: {} modes, {} trilinear terms", mode_count(cutoff), system.term_count());

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let coeffs: Vec<C64> = (0..mode_count(cutoff))
        .map(|_| C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
        .collect();
    let u0 = SpectralState::from_coeffs(cutoff, coeffs)?;
    let u0 = u0.scaled(C64::new(1.0 / u0.norm(), 0.0));

    let traj = evolve(&u0, &system, 10.0, EvolveOptions::rk4(1e-3).with_stride(1000))?;
    println!("{:>6} {:>20} {:>20} {:>20} {:>20}", "t", "M", "P", "E", "<H>");
    for s in &traj.samples {
        let c = &s.conserved;
        println!("{:>6.2} {:>20.15} {:>20.15} {:>20.15} {:>20.15}", s.state.time, c.mass, c.momentum, c.hamiltonian, c.h_expect);
    }
    println!(
        "relative drifts: M {:.1e}, E {:.1e}",
        traj.relative_drift(|c| c.mass),
        traj.relative_drift(|c| c.hamiltonian)
    );

    let path = std::env::temp_dir().join("cr-resonant-flow.csv");
    traj.save_csv(&path)?;
    println!("trajectory written to {}", path.display());
    Ok(())
}
