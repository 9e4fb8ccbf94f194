//! Compare the Hermite-truncated cubic NLS with harmonic trapping against the
//! resonant flow for small data, and print the cubic error scaling.
//!
//! Run with `cargo run --release --example nls_vs_cr -- [cutoff]`; the full
//! product table grows quickly with the cutoff.

use cr_core::coefficients::{build_table, BuildOptions, Family};
use cr_core::integrate::Integrator;
use cr_core::nls::{compare_flows, CompareOptions, NlsSystem};
use cr_core::state::SpectralState;
use cr_core::{ModeIndex, ResonantSystem, C64};

fn main() -> cr_core::Result<()> {
    let cutoff: u32 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(6);
    let full = build_table(Family::FullProduct, cutoff, BuildOptions::default())?;
    let nls = NlsSystem::new(&full, cutoff)?;
    let cr = ResonantSystem::new(&full.resonant_part(), cutoff)?;
    println!("full-product table: {} entries ({} resonant)", full.len(), full.resonant_part().len());

    let md = |n, m| ModeIndex::new(n, m).unwrap();
    let u0 = SpectralState::from_modes(
        cutoff,
        &[(md(0, 0), C64::new(0.6, 0.0)), (md(1, 1), C64::new(0.3, 0.4)), (md(2, -2), C64::new(-0.2, 0.1)), (md(3, 1), C64::new(0.1, -0.3))],
    )?;
    let opts = CompareOptions { s: 1.5, integrator: Integrator::Rk4 { step: 2e-3 }, normalize: true };
    let b_list = [0.2, 0.1, 0.05];
    let report = compare_flows(&u0, &[0.5, 1.0, 2.0], &b_list, &nls, &cr, opts)?;
    report.write_csv(std::io::stdout()).expect("stdout");

    for w in b_list.windows(2) {
        let (a, b) = (report.error_at(w[0], 1.0).unwrap(), report.error_at(w[1], 1.0).unwrap());
        println!("B {} -> {}: error ratio {:.3}, exponent {:.3}", w[0], w[1], a / b, (a / b).log2());
    }
    Ok(())
}
