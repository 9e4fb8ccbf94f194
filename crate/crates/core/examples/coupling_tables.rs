//! Build coupling tables for each family, cross-check them, and cache one on disk.
//!
//! Run with `cargo run --release --example coupling_tables -- [cutoff]`.

use std::f64::consts::PI;

use cr_core::coefficients::{build_table, lll_coeff, load_table, radial_coeff, save_table, BuildOptions, Family};
use cr_core::oracle::{oracle_nodes, tensor_product_integral};

fn main() -> cr_core::Result<()> {
    let cutoff: u32 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(6);

    println!("alpha(0,0,0,0): lll {:.16}, radial {:.16}, pi/2 {:.16}", lll_coeff(0, 0, 0, 0), radial_coeff(0, 0, 0, 0).value, PI / 2.0);
    let r = radial_coeff(1, 1, 0, 2);
    println!("radial alpha(h1,h1,h0,h2) = {} * pi = {:.16}", r.pi_multiple, r.value);

    for family in [Family::Lll, Family::Radial, Family::General2d, Family::FullProduct] {
        let t = build_table(family, cutoff, BuildOptions::default())?;
        println!("{family:<13} cutoff {cutoff}: {:>7} canonical entries, {:>8} ordered quadruples", t.len(), t.ordered_len());
    }

    let general = build_table(Family::General2d, cutoff.min(4), BuildOptions::default())?;
    let worst = general
        .entries()
        .iter()
        .map(|e| (tensor_product_integral(e.key.q, oracle_nodes(&e.key.q)).re - e.value).abs())
        .fold(0.0, f64::max);
    println!("general2d vs Cartesian tensor-grid oracle: max deviation {worst:.2e}");

    let dir = std::env::temp_dir().join("cr-example-tables");
    std::fs::create_dir_all(&dir).map_err(|e| cr_core::CrError::io(&dir, e))?;
    let path = dir.join(format!("general2d-{}.crt", general.cutoff()));
    save_table(&general, &path)?;
    let back = load_table(&path)?;
    println!("saved and reloaded {} ({} entries, identical: {})", path.display(), back.len(), back == general);
    Ok(())
}
