//! Gauss–Laguerre and Gauss–Hermite rules.
//!
//! Nodes come from Newton iteration on the three-term recurrences, seeded
//! with the classical asymptotic guesses. Rules are cached per node count
//! since the coefficient builders ask for the same few sizes repeatedly.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

const NEWTON_MAX_ITER: usize = 100;
const NEWTON_EPS: f64 = 3e-15;

#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ wᵢ f(xᵢ)`.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

type Cache = Mutex<HashMap<usize, Arc<GaussRule>>>;

fn cached(cache: &'static OnceLock<Cache>, n: usize, build: fn(usize) -> GaussRule) -> Arc<GaussRule> {
    let cache = cache.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("quadrature cache poisoned").get(&n) {
        return rule.clone();
    }
    let rule = Arc::new(build(n));
    cache.lock().expect("quadrature cache poisoned").entry(n).or_insert(rule).clone()
}

/// `n`-point rule for `∫₀^∞ f(x) e^{-x} dx`; exact for polynomials of degree `2n - 1`.
pub fn gauss_laguerre(n: usize) -> Arc<GaussRule> {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    cached(&CACHE, n, build_laguerre)
}

/// `n`-point rule for `∫ f(x) e^{-x²} dx` over the real line.
pub fn gauss_hermite(n: usize) -> Arc<GaussRule> {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    cached(&CACHE, n, build_hermite)
}

fn build_laguerre(n: usize) -> GaussRule {
    assert!(n > 0, "empty quadrature rule");
    let nf = n as f64;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let mut z = 0.0f64;
    for i in 0..n {
        z = match i {
            0 => 3.0 / (1.0 + 2.4 * nf),
            1 => z + 15.0 / (1.0 + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                z + (1.0 + 2.55 * ai) / (1.9 * ai) * (z - nodes[i - 2])
            }
        };
        // L_n(z), L_{n-1}(z) and L_n'(z)
        let eval = |z: f64| {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0 - z) * p2 - jf * p3) / (jf + 1.0);
            }
            (p1, p2, (nf * p1 - nf * p2) / z)
        };
        for _ in 0..NEWTON_MAX_ITER {
            let (p1, _, pp) = eval(z);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= NEWTON_EPS * z.abs().max(1.0) {
                break;
            }
        }
        let (_, p2, pp) = eval(z);
        nodes[i] = z;
        weights[i] = -1.0 / (pp * nf * p2);
    }
    GaussRule { nodes, weights }
}

fn build_hermite(n: usize) -> GaussRule {
    assert!(n > 0, "empty quadrature rule");
    let nf = n as f64;
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    let mut z = 0.0f64;
    let eval = |z: f64| {
        let mut p1 = pim4;
        let mut p2 = 0.0;
        for j in 0..n {
            let p3 = p2;
            p2 = p1;
            let jf = j as f64;
            p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
        }
        (p1, (2.0 * nf).sqrt() * p2)
    };
    for i in 0..half {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        for _ in 0..NEWTON_MAX_ITER {
            let (p1, pp) = eval(z);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= NEWTON_EPS * z.abs().max(1.0) {
                break;
            }
        }
        let (_, pp) = eval(z);
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        weights[i] = 2.0 / (pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    // node order: descending from the largest positive root; flip to ascending
    nodes.reverse();
    weights.reverse();
    GaussRule { nodes, weights }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn factorial(k: u32) -> f64 {
        (1..=k).map(f64::from).product()
    }

    #[test]
    fn laguerre_moments_are_factorials() {
        for n in [1usize, 5, 20, 40, 80] {
            let rule = gauss_laguerre(n);
            assert_relative_eq!(rule.weights.iter().sum::<f64>(), 1.0, max_relative = 1e-13);
            for k in 0..(2 * n as u32).min(30) {
                let m = rule.integrate(|x| x.powi(k as i32));
                assert_relative_eq!(m, factorial(k), max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn hermite_moments() {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        for n in [1usize, 2, 7, 24, 60] {
            let rule = gauss_hermite(n);
            assert_relative_eq!(rule.weights.iter().sum::<f64>(), sqrt_pi, max_relative = 1e-13);
            // ∫ x^{2k} e^{-x²} = Γ(k + 1/2)
            let mut gamma_half = sqrt_pi;
            for k in 0..(n as i32).min(15) {
                let m = rule.integrate(|x| x.powi(2 * k));
                assert_relative_eq!(m, gamma_half, max_relative = 1e-11);
                gamma_half *= k as f64 + 0.5;
            }
            assert!(rule.integrate(|x| x.powi(3)).abs() < 1e-12);
        }
    }
}
