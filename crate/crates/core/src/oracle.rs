//! Brute-force reference for the coupling coefficients.
//!
//! Builds `φ_{n,m}` in the Cartesian Hermite basis by applying
//! `a_d† = (a_x† + i a_y†)/√2` and `a_g† = (a_x† − i a_y†)/√2` to the
//! ground state, then integrates `π² φ₁φ₂φ̄₃φ̄₄` on a tensor Gauss–Hermite
//! grid. Nothing here uses Laguerre polynomials or the angular reduction.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::basis::ModeIndex;
use crate::quadrature::gauss_hermite;
use crate::C64;

/// `φ_{n,m} = Σ_{j+k=n} coef[j] ψ_j(x) ψ_k(y)` with `ψ` the 1D Hermite functions.
#[derive(Clone, Debug)]
pub struct CartesianExpansion {
    pub n: u32,
    pub coef: Vec<C64>,
}

/// Cartesian expansion of `φ_{n,m} = (a_d†)^p (a_g†)^q φ_{0,0} / √(p! q!)`.
pub fn cartesian_expansion(mode: ModeIndex) -> CartesianExpansion {
    let p = ((mode.n() as i32 + mode.m()) / 2) as u32;
    let q = ((mode.n() as i32 - mode.m()) / 2) as u32;
    // state as map (jx, jy) -> amplitude
    let mut state: BTreeMap<(u32, u32), C64> = BTreeMap::new();
    state.insert((0, 0), C64::new(1.0, 0.0));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let raise = |st: &BTreeMap<(u32, u32), C64>, sign: f64| {
        let mut out: BTreeMap<(u32, u32), C64> = BTreeMap::new();
        for (&(jx, jy), &a) in st {
            *out.entry((jx + 1, jy)).or_default() += a * s * ((jx + 1) as f64).sqrt();
            *out.entry((jx, jy + 1)).or_default() += a * C64::new(0.0, sign * s) * ((jy + 1) as f64).sqrt();
        }
        out
    };
    let mut norm = 1.0;
    for i in 0..p {
        state = raise(&state, 1.0);
        norm *= (i + 1) as f64;
    }
    for i in 0..q {
        state = raise(&state, -1.0);
        norm *= (i + 1) as f64;
    }
    let mut coef = vec![C64::new(0.0, 0.0); mode.n() as usize + 1];
    for ((jx, _), a) in state {
        coef[jx as usize] = a / norm.sqrt();
    }
    CartesianExpansion { n: mode.n(), coef }
}

/// `ψ_j(x) e^{x²/2}` for `j = 0..=n`, i.e. normalized Hermite functions
/// with the Gaussian factor stripped.
fn hermite_polys(n: u32, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let p0 = PI.powf(-0.25);
    out.push(p0);
    if n >= 1 {
        out.push(2f64.sqrt() * x * p0);
    }
    for j in 2..=n as usize {
        let jf = j as f64;
        let v = (2.0 / jf).sqrt() * x * out[j - 1] - ((jf - 1.0) / jf).sqrt() * out[j - 2];
        out.push(v);
    }
    out
}

impl CartesianExpansion {
    /// Value with the Gaussian `e^{-(x²+y²)/2}` stripped.
    fn stripped(&self, hx: &[f64], hy: &[f64]) -> C64 {
        let n = self.n as usize;
        (0..=n).map(|j| self.coef[j] * hx[j] * hy[n - j]).sum()
    }

    /// Pointwise value `φ_{n,m}(x, y)`.
    pub fn eval(&self, x: f64, y: f64) -> C64 {
        let hx = hermite_polys(self.n, x);
        let hy = hermite_polys(self.n, y);
        self.stripped(&hx, &hy) * (-0.5 * (x * x + y * y)).exp()
    }
}

/// `π² ∫_{ℝ²} φ_{q1} φ_{q2} φ̄_{q3} φ̄_{q4} dx` on a `nodes × nodes` grid.
///
/// The integrand is a polynomial times `e^{-2|x|²}`; substituting
/// `x = u/√2` makes the rule exact once `nodes > Σn/2`.
pub fn tensor_product_integral(q: [ModeIndex; 4], nodes: usize) -> C64 {
    let rule = gauss_hermite(nodes);
    let exps = q.map(cartesian_expansion);
    let nmax = q.iter().map(|m| m.n()).max().unwrap_or(0);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let tables: Vec<Vec<f64>> = rule.nodes.iter().map(|&u| hermite_polys(nmax, u * scale)).collect();
    let mut total = C64::new(0.0, 0.0);
    for (i, wx) in rule.weights.iter().enumerate() {
        for (j, wy) in rule.weights.iter().enumerate() {
            let v = exps[0].stripped(&tables[i], &tables[j])
                * exps[1].stripped(&tables[i], &tables[j])
                * exps[2].stripped(&tables[i], &tables[j]).conj()
                * exps[3].stripped(&tables[i], &tables[j]).conj();
            total += v * (wx * wy);
        }
    }
    // dx dy = du dv / 2
    total * (PI * PI * 0.5)
}

/// Node count that integrates the quadruple exactly, with margin.
pub fn oracle_nodes(q: &[ModeIndex; 4]) -> usize {
    q.iter().map(|m| m.n() as usize).sum::<usize>() / 2 + 8
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{special_hermite, PlanePoint};
    use crate::state::modes;

    #[test]
    fn expansion_matches_polar_evaluation() {
        for q in modes(7) {
            let e = cartesian_expansion(q);
            for &(x, y) in &[(0.3, -0.8), (1.2, 0.5), (-0.4, -1.9)] {
                let a = e.eval(x, y);
                let b = special_hermite(q, PlanePoint::Cartesian { x, y });
                assert!((a - b).norm() < 1e-12, "{q} at ({x},{y}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn expansions_are_normalized() {
        for q in modes(8) {
            let e = cartesian_expansion(q);
            let norm: f64 = e.coef.iter().map(|c| c.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn ground_state_value() {
        let z = ModeIndex::new(0, 0).unwrap();
        let v = tensor_product_integral([z; 4], 4);
        assert!((v.re - PI / 2.0).abs() < 1e-13 && v.im.abs() < 1e-14);
    }
}
