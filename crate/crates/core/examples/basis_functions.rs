//! Evaluate special Hermite functions and move between them with ladder operators.

use cr_core::basis::{ladder_apply, mode_eigendata, special_hermite, LadderOp, ModeIndex, PlanePoint};
use cr_core::state::SpectralState;
use cr_core::C64;

fn main() -> cr_core::Result<()> {
    let p = PlanePoint::Polar { r: 0.9, theta: 0.4 };
    println!("mode      H     L   phi(r=0.9, theta=0.4)");
    for (n, m) in [(0, 0), (1, 1), (1, -1), (2, 0), (3, 1), (4, -4)] {
        let q = ModeIndex::new(n, m)?;
        let e = mode_eigendata(q);
        let v = special_hermite(q, p);
        println!("{q:<7} {:>4} {:>4}   {:+.6} {:+.6}i", e.h_eigenvalue, e.l_eigenvalue, v.re, v.im);
    }

    // a_d† raises (n, m) to (n+1, m+1); a_g† to (n+1, m-1)
    let s = SpectralState::pure(ModeIndex::new(2, 0)?, 2, C64::new(1.0, 0.0))?;
    for op in [LadderOp::AdDag, LadderOp::AgDag, LadderOp::Ad, LadderOp::Ag] {
        let out = ladder_apply(op, &s, 3)?;
        let hits: Vec<String> = out.iter().filter(|(_, c)| c.norm() > 0.0).map(|(q, c)| format!("{q} x {:.4}", c.re)).collect();
        println!("{op:?} (2,0) = {}", hits.join(" + "));
    }
    Ok(())
}
