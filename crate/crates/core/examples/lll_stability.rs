//! Linear stability of the lowest-Landau-level waves phi_{N,N}.

use cr_core::stability::{block_asymptotics, discriminant, lll_linearization, unstable_mode_count};

fn main() {
    println!("Delta(1,0) = {:+.6}  Delta(2,0) = {:+.6}", discriminant(1, 0), discriminant(2, 0));

    println!("\n   N  unstable  fraction  largest growth rate");
    for n in [2, 5, 10, 20, 40, 80] {
        let lin = lll_linearization(n);
        let growth = lin.blocks.iter().map(|b| b.growth_rate()).fold(0.0, f64::max);
        let count = unstable_mode_count(n);
        println!("{n:4}  {count:8}  {:8.4}  {growth:.4e}", count as f64 / n as f64);
    }

    let n = 200;
    let w = lll_linearization(n).omega;
    println!("\nomega_N sqrt(N) at N = {n}: {:.6}  (sqrt(pi)/2 = {:.6})", w * (n as f64).sqrt(), std::f64::consts::PI.sqrt() / 2.0);

    let ns: Vec<u32> = (50..=200).step_by(10).collect();
    for lambda in [0.3, 0.5, 0.7] {
        let a = block_asymptotics(lambda, &ns);
        println!(
            "k = {lambda} N: log-slopes A {:+.4}  B {:+.4}  C {:+.4}; omega ~ N^{:+.4}",
            a.slope_a, a.slope_b, a.slope_c, a.omega_power
        );
    }
}
