//! Special Hermite functions `φ_{n,m}` and their algebra.
//!
//! `φ_{n,m}` is the joint eigenfunction of the harmonic oscillator
//! `H = -Δ + |x|²` (eigenvalue `2(n+1)`) and the angular momentum `L`
//! (eigenvalue `m`), with `|m| <= n` and `n + m` even. The phase convention
//! is the one obtained by applying the raising operators `a_d†`, `a_g†` to
//! the Gaussian `e^{-|z|²/2}/√π` with positive real normalisation, which
//! makes every radial profile real:
//!
//! ```text
//! φ_{n,m}(r, θ) = (-1)^q √(q! / (π p!)) r^{|m|} L_q^{(|m|)}(r²) e^{-r²/2} e^{imθ},
//! q = (n - |m|)/2,  p = (n + |m|)/2.
//! ```
//!
//! In particular `φ_{2k,0} = (-1)^k h_k` where `h_k = L_k(r²) e^{-r²/2}/√π`
//! is the positively normalised radial mode.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{CrError, Result};
use crate::state::SpectralState;
use crate::C64;

/// Label `(n, m)` of a special Hermite function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeIndex {
    n: u32,
    m: i32,
}

impl ModeIndex {
    pub fn new(n: u32, m: i32) -> Result<Self> {
        if m.unsigned_abs() > n || (n as i64 + m as i64) % 2 != 0 {
            return Err(CrError::InvalidMode { n: n as i64, m: m as i64 });
        }
        Ok(ModeIndex { n, m })
    }

    pub(crate) fn new_unchecked(n: u32, m: i32) -> Self {
        debug_assert!(m.unsigned_abs() <= n && (n as i64 + m as i64) % 2 == 0);
        ModeIndex { n, m }
    }

    pub fn n(self) -> u32 {
        self.n
    }

    pub fn m(self) -> i32 {
        self.m
    }

    /// Radial order `q = (n - |m|)/2`, the degree of the Laguerre factor.
    pub fn radial_order(self) -> u32 {
        (self.n - self.m.unsigned_abs()) / 2
    }

    /// `φ_{n,-m}`, the pointwise complex conjugate of `φ_{n,m}`.
    pub fn conjugate(self) -> Self {
        ModeIndex { n: self.n, m: -self.m }
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.n, self.m)
    }
}

/// Index `k` of the radial mode `h_k`, which lives on `φ_{2k,0}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RadialIndex(pub u32);

impl RadialIndex {
    pub fn mode(self) -> ModeIndex {
        ModeIndex::new_unchecked(2 * self.0, 0)
    }

    /// `H h_k = (4k + 2) h_k`.
    pub fn h_eigenvalue(self) -> f64 {
        4.0 * self.0 as f64 + 2.0
    }

    /// Sign relating the two radial normalisations: `φ_{2k,0} = sign · h_k`.
    pub fn basis_sign(self) -> f64 {
        if self.0 % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Laguerre polynomial `L_k(x)` by the three-term recurrence.
pub fn laguerre(k: u32, x: f64) -> f64 {
    generalized_laguerre(k, 0.0, x)
}

/// Generalized Laguerre polynomial `L_k^{(a)}(x)`.
pub fn generalized_laguerre(k: u32, a: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = 1.0 + a - x;
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + a - x) * cur - (jf + a) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

pub(crate) fn ln_factorial(k: u32) -> f64 {
    libm::lgamma(k as f64 + 1.0)
}

/// Radial polynomial part of `φ_{n,m}` in the variable `ρ = r²`, with the
/// Gaussian and the `1/√π` stripped:
/// `(-1)^q √(q!/p!) ρ^{|m|/2} L_q^{(|m|)}(ρ)`.
pub fn radial_polynomial(mode: ModeIndex, rho: f64) -> f64 {
    let q = mode.radial_order();
    let am = mode.m.unsigned_abs();
    let p = q + am;
    let lag = generalized_laguerre(q, am as f64, rho);
    let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
    if am == 0 {
        return sign * lag;
    }
    if rho <= 0.0 {
        return 0.0;
    }
    let log_pre = 0.5 * (ln_factorial(q) - ln_factorial(p)) + 0.5 * am as f64 * rho.ln();
    sign * log_pre.exp() * lag
}

/// Real radial profile `R_{n,m}(r)`, so that `φ_{n,m} = R_{n,m}(r) e^{imθ}`.
pub fn radial_profile(mode: ModeIndex, r: f64) -> f64 {
    let r = r.abs();
    let q = mode.radial_order();
    let am = mode.m.unsigned_abs();
    let p = q + am;
    let rho = r * r;
    let lag = generalized_laguerre(q, am as f64, rho);
    let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
    if am > 0 && r == 0.0 {
        return 0.0;
    }
    let mut log_pre = 0.5 * (ln_factorial(q) - ln_factorial(p)) - 0.5 * rho - 0.5 * PI.ln();
    if am > 0 {
        log_pre += am as f64 * r.ln();
    }
    sign * log_pre.exp() * lag
}

/// Point of the plane in either coordinate system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PlanePoint {
    Cartesian { x: f64, y: f64 },
    Polar { r: f64, theta: f64 },
}

impl PlanePoint {
    fn polar(self) -> (f64, f64) {
        match self {
            PlanePoint::Cartesian { x, y } => (x.hypot(y), y.atan2(x)),
            PlanePoint::Polar { r, theta } => (r, theta),
        }
    }
}

/// `φ_{n,m}` at a point of the plane.
pub fn special_hermite(mode: ModeIndex, point: PlanePoint) -> C64 {
    let (r, theta) = point.polar();
    C64::from_polar(radial_profile(mode, r), mode.m as f64 * theta)
}

/// `h_k(x) = L_k(|x|²) e^{-|x|²/2} / √π`, positively normalised at the origin.
pub fn radial_mode(k: RadialIndex, r: f64) -> f64 {
    laguerre(k.0, r * r) * (-0.5 * r * r).exp() / PI.sqrt()
}

/// Creation / annihilation operators in complex coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LadderOp {
    /// `a_d φ_{n,m} = √((n+m)/2) φ_{n-1,m-1}`
    Ad,
    /// `a_g φ_{n,m} = √((n-m)/2) φ_{n-1,m+1}`
    Ag,
    /// `a_d† φ_{n,m} = √((n+m+2)/2) φ_{n+1,m+1}`
    AdDag,
    /// `a_g† φ_{n,m} = √((n-m+2)/2) φ_{n+1,m-1}`
    AgDag,
}

impl LadderOp {
    /// Image mode and coefficient of the action on a single basis element.
    /// `None` when the image vanishes.
    pub fn on_mode(self, mode: ModeIndex) -> Option<(ModeIndex, f64)> {
        let (n, m) = (mode.n as i64, mode.m as i64);
        let (coef2, n2, m2) = match self {
            LadderOp::Ad => (n + m, n - 1, m - 1),
            LadderOp::Ag => (n - m, n - 1, m + 1),
            LadderOp::AdDag => (n + m + 2, n + 1, m + 1),
            LadderOp::AgDag => (n - m + 2, n + 1, m - 1),
        };
        if coef2 == 0 {
            return None;
        }
        Some((ModeIndex::new_unchecked(n2 as u32, m2 as i32), (coef2 as f64 / 2.0).sqrt()))
    }
}

/// Applies a ladder operator to a state; the result lives at `target_cutoff`.
pub fn ladder_apply(op: LadderOp, state: &SpectralState, target_cutoff: u32) -> Result<SpectralState> {
    let mut out = SpectralState::zeros(target_cutoff);
    out.time = state.time;
    for (mode, c) in state.iter() {
        if c == C64::new(0.0, 0.0) {
            continue;
        }
        if let Some((image, k)) = op.on_mode(mode) {
            if image.n > target_cutoff {
                return Err(CrError::CutoffExceeded { mode: image, cutoff: target_cutoff });
            }
            let cur = out.get(image);
            out.set(image, cur + c * k)?;
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eigendata {
    pub h_eigenvalue: f64,
    pub l_eigenvalue: i32,
    pub fourier_phase: C64,
}

/// `(2(n+1), m, e^{-inπ/2})` with the phase taken exactly from `n mod 4`.
pub fn mode_eigendata(mode: ModeIndex) -> Eigendata {
    Eigendata {
        h_eigenvalue: 2.0 * (mode.n as f64 + 1.0),
        l_eigenvalue: mode.m,
        fourier_phase: fourier_phase(mode.n),
    }
}

pub(crate) fn fourier_phase(n: u32) -> C64 {
    match n % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, -1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, 1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{gauss_hermite, gauss_laguerre};
    use approx::assert_abs_diff_eq;

    fn mode(n: u32, m: i32) -> ModeIndex {
        ModeIndex::new(n, m).unwrap()
    }

    #[test]
    fn invalid_modes_are_rejected() {
        assert!(ModeIndex::new(1, 0).is_err());
        assert!(ModeIndex::new(2, 4).is_err());
        assert!(ModeIndex::new(3, -5).is_err());
        assert!(ModeIndex::new(3, -3).is_ok());
    }

    #[test]
    fn laguerre_values() {
        for x in [-3.0, 0.0, 0.7, 12.5] {
            assert_eq!(laguerre(0, x), 1.0);
        }
        assert_eq!(laguerre(1, 1.0), 0.0);
        // L₂(x) = 1 - 2x + x²/2
        assert_abs_diff_eq!(laguerre(2, 3.0), 1.0 - 6.0 + 4.5, epsilon = 1e-14);
    }

    #[test]
    fn laguerre_orthonormal_under_gauss_laguerre() {
        let rule = gauss_laguerre(24);
        for j in 0..=10 {
            for k in 0..=10 {
                let v = rule.integrate(|x| laguerre(j, x) * laguerre(k, x));
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-12, "j={j} k={k} got {v}");
            }
        }
    }

    #[test]
    fn ground_state_and_lll_closed_forms() {
        let origin = PlanePoint::Cartesian { x: 0.0, y: 0.0 };
        assert_abs_diff_eq!(special_hermite(mode(0, 0), origin).re, 1.0 / PI.sqrt(), epsilon = 1e-15);
        // φ_{n,n}(z) = z^n e^{-|z|²/2} / √(π n!) at z = 1
        let mut fact = 1.0;
        for n in 0..=5u32 {
            if n > 0 {
                fact *= n as f64;
            }
            let v = special_hermite(mode(n, n as i32), PlanePoint::Cartesian { x: 1.0, y: 0.0 });
            let want = (-0.5f64).exp() / (PI * fact).sqrt();
            assert_abs_diff_eq!(v.re, want, epsilon = 1e-14);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn radial_modes_match_laguerre_up_to_basis_sign() {
        for k in 0..=5u32 {
            for &r in &[0.0, 0.3, 1.0, 1.7, 3.2] {
                let phi = special_hermite(mode(2 * k, 0), PlanePoint::Polar { r, theta: 0.4 });
                let h = radial_mode(RadialIndex(k), r);
                assert_abs_diff_eq!(phi.re, RadialIndex(k).basis_sign() * h, epsilon = 1e-13);
                assert_abs_diff_eq!(phi.im, 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn ladder_examples() {
        let s = SpectralState::pure(mode(1, 1), 1, C64::new(1.0, 0.0)).unwrap();
        let down = ladder_apply(LadderOp::Ad, &s, 1).unwrap();
        assert_abs_diff_eq!(down.get(mode(0, 0)).re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(down.mass(), 1.0, epsilon = 1e-15);

        for n in 0..5u32 {
            let s = SpectralState::pure(mode(n, n as i32), n, C64::new(1.0, 0.0)).unwrap();
            assert_eq!(ladder_apply(LadderOp::Ag, &s, n).unwrap().mass(), 0.0);
        }

        let s = SpectralState::pure(mode(2, 0), 2, C64::new(1.0, 0.0)).unwrap();
        let up = ladder_apply(LadderOp::AdDag, &s, 3).unwrap();
        let back = ladder_apply(LadderOp::Ad, &up, 2).unwrap();
        assert_abs_diff_eq!(back.get(mode(2, 0)).re, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(back.mass(), 4.0, epsilon = 1e-13);
    }

    #[test]
    fn raising_past_cutoff_is_an_error() {
        let s = SpectralState::pure(mode(2, 2), 2, C64::new(1.0, 0.0)).unwrap();
        assert!(matches!(
            ladder_apply(LadderOp::AgDag, &s, 2),
            Err(CrError::CutoffExceeded { .. })
        ));
        // zero coefficients never trigger the check
        let z = SpectralState::zeros(2);
        assert!(ladder_apply(LadderOp::AdDag, &z, 2).is_ok());
    }

    #[test]
    fn eigendata_examples() {
        let e = mode_eigendata(mode(0, 0));
        assert_eq!((e.h_eigenvalue, e.l_eigenvalue, e.fourier_phase), (2.0, 0, C64::new(1.0, 0.0)));
        let e = mode_eigendata(mode(2, 0));
        assert_eq!((e.h_eigenvalue, e.l_eigenvalue, e.fourier_phase), (6.0, 0, C64::new(-1.0, 0.0)));
        let e = mode_eigendata(mode(3, 1));
        assert_eq!((e.h_eigenvalue, e.l_eigenvalue, e.fourier_phase), (8.0, 1, C64::new(0.0, 1.0)));
    }

    fn all_modes(nmax: u32) -> Vec<ModeIndex> {
        crate::state::modes(nmax).collect()
    }

    #[test]
    fn orthonormal_under_tensor_gauss_hermite() {
        let rule = gauss_hermite(30);
        let modes = all_modes(12);
        // sample φ on the grid once, with the Gaussian weight divided out
        let grid: Vec<(f64, f64, f64)> = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .flat_map(|(&x, &wx)| {
                rule.nodes.iter().zip(&rule.weights).map(move |(&y, &wy)| (x, y, wx * wy * (x * x + y * y).exp()))
            })
            .collect();
        let values: Vec<Vec<C64>> = modes
            .iter()
            .map(|&q| grid.iter().map(|&(x, y, _)| special_hermite(q, PlanePoint::Cartesian { x, y })).collect())
            .collect();
        for (i, a) in modes.iter().enumerate() {
            for (j, b) in modes.iter().enumerate().skip(i) {
                let ip: C64 = grid.iter().enumerate().map(|(g, &(_, _, w))| values[i][g] * values[j][g].conj() * w).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((ip - want).norm() < 1e-10, "<{a},{b}> = {ip}");
            }
        }
    }

    #[test]
    fn raising_operator_pointwise() {
        // a_d† = (z - 2∂_{z̄})/2, checked by central differences on a few points
        let h = 1e-5;
        for &(n, m) in &[(0, 0), (1, -1), (2, 0), (3, 1), (4, -2)] {
            let q = mode(n, m);
            let (up, k) = LadderOp::AdDag.on_mode(q).unwrap();
            for &(x, y) in &[(0.3, -0.2), (1.1, 0.4), (-0.7, 0.9)] {
                let f = |x: f64, y: f64| special_hermite(q, PlanePoint::Cartesian { x, y });
                let dx = (f(x + h, y) - f(x - h, y)) / (2.0 * h);
                let dy = (f(x, y + h) - f(x, y - h)) / (2.0 * h);
                let dzbar = (dx + C64::i() * dy) * 0.5;
                let lhs = (C64::new(x, y) * f(x, y) - dzbar * 2.0) * 0.5;
                let rhs = special_hermite(up, PlanePoint::Cartesian { x, y }) * k;
                assert!((lhs - rhs).norm() < 1e-9, "mode {q} at ({x},{y}): {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn negative_m_is_conjugate() {
        for q in all_modes(9) {
            for &(x, y) in &[(0.2, 0.9), (-1.3, 0.4), (2.1, -1.7)] {
                let p = PlanePoint::Cartesian { x, y };
                let a = special_hermite(q, p).conj();
                let b = special_hermite(q.conjugate(), p);
                assert!((a - b).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn high_order_profiles_stay_finite() {
        let q = mode(160, 40);
        for r in [0.5, 5.0, 12.0, 20.0] {
            assert!(radial_profile(q, r).is_finite());
        }
    }
}
