//! Exact dynamics on small invariant subspaces.
//!
//! * `E₀ = span{φ_{0,0}}` and `E₁ = span{φ_{1,1}, φ_{1,-1}}`: explicit phase
//!   rotations.
//! * `E₂ = span{φ_{2,2}, φ_{2,0}, φ_{2,-2}}`: in physical time the system is
//!
//!   ```text
//!   i ċ₂  = (π/16)[3|c₂|²c₂ + 6|c₋₂|²c₂ + 4|c₀|²c₂ + 2 c̄₋₂ c₀²]
//!   i ċ₋₂ = (π/16)[3|c₋₂|²c₋₂ + 6|c₂|²c₋₂ + 4|c₀|²c₋₂ + 2 c̄₂ c₀²]
//!   i ċ₀  = (π/16)[4|c₀|²c₀ + 4|c₂|²c₀ + 4|c₋₂|²c₀ + 4 c₂c₋₂ c̄₀]
//!   ```
//!
//!   With `τ = πt/16` and `d = e^{4iMτ} c` it becomes the gauged system
//!   solved by [`e2_rhs`], whose stationary waves form the catalogue of
//!   [`stationary_wave`].
//! * The radial orbit of the Gaussian under phase, `e^{iνH}`, `e^{iμ|x|²}`
//!   and `L²` scaling, in the coordinates `c_n` of `h_n`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::{ModeIndex, RadialIndex};
use crate::error::{CrError, Result};
use crate::integrate::{integrate, EvolveOptions};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::resonant::ResonantSystem;
use crate::state::SpectralState;
use crate::C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// `c(t) = e^{-i(π/2)|c₀|²t} c₀` on `E₀`.
pub fn e0_solution(c0: C64, t: f64) -> C64 {
    c0 * C64::from_polar(1.0, -0.5 * PI * c0.norm_sqr() * t)
}

/// Solution on `E₁` from data `c₁ φ_{1,1} + c₋₁ φ_{1,-1}`.
pub fn e1_solution(c1: C64, cm1: C64, t: f64) -> (C64, C64) {
    let (a, b) = (c1.norm_sqr(), cm1.norm_sqr());
    let r1 = 0.25 * PI * (a + 2.0 * b);
    let rm1 = 0.25 * PI * (2.0 * a + b);
    (c1 * C64::from_polar(1.0, -r1 * t), cm1 * C64::from_polar(1.0, -rm1 * t))
}

/// The three `E₂` modes in the order `m = 2, 0, -2`.
pub fn e2_modes() -> [ModeIndex; 3] {
    [ModeIndex::new_unchecked(2, 2), ModeIndex::new_unchecked(2, 0), ModeIndex::new_unchecked(2, -2)]
}

/// Gauged `E₂` coordinates `d_i` at rescaled time `τ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct E2State {
    pub d2: C64,
    pub d0: C64,
    pub dm2: C64,
    pub tau: f64,
}

impl E2State {
    pub fn new(d2: C64, d0: C64, dm2: C64) -> Self {
        E2State { d2, d0, dm2, tau: 0.0 }
    }

    pub fn as_array(&self) -> [C64; 3] {
        [self.d2, self.d0, self.dm2]
    }

    pub fn mass(&self) -> f64 {
        self.d2.norm_sqr() + self.d0.norm_sqr() + self.dm2.norm_sqr()
    }

    pub fn momentum(&self) -> f64 {
        self.d2.norm_sqr() - self.dm2.norm_sqr()
    }

    /// Physical time of `τ`.
    pub fn physical_time(&self) -> f64 {
        16.0 * self.tau / PI
    }

    /// Gauges physical coefficients `(c₂, c₀, c₋₂)` at time `t`.
    pub fn from_physical(c: [C64; 3], t: f64) -> Self {
        let tau = PI * t / 16.0;
        let m: f64 = c.iter().map(|v| v.norm_sqr()).sum();
        let g = C64::from_polar(1.0, 4.0 * m * tau);
        E2State { d2: c[0] * g, d0: c[1] * g, dm2: c[2] * g, tau }
    }

    /// Physical coefficients `(c₂, c₀, c₋₂)` and time.
    pub fn to_physical(&self) -> ([C64; 3], f64) {
        let g = C64::from_polar(1.0, -4.0 * self.mass() * self.tau);
        ([self.d2 * g, self.d0 * g, self.dm2 * g], self.physical_time())
    }

    /// Embeds the physical coefficients into a spectral state.
    pub fn to_spectral(&self, cutoff: u32) -> Result<SpectralState> {
        let (c, t) = self.to_physical();
        let modes = e2_modes();
        let mut s = SpectralState::from_modes(cutoff, &[(modes[0], c[0]), (modes[1], c[1]), (modes[2], c[2])])?;
        s.time = t;
        Ok(s)
    }

    /// Reads the `E₂` part of a spectral state.
    pub fn from_spectral(state: &SpectralState) -> Self {
        let c = e2_modes().map(|q| state.get(q));
        Self::from_physical(c, state.time)
    }
}

/// `dd/dτ` of the gauged system, in the order `(d₂, d₀, d₋₂)`.
pub fn e2_rhs(s: &E2State) -> [C64; 3] {
    let (d2, d0, dm2) = (s.d2, s.d0, s.dm2);
    let i2 = d2 * (-d2.norm_sqr() + 2.0 * dm2.norm_sqr()) + dm2.conj() * d0 * d0 * 2.0;
    let im2 = dm2 * (-dm2.norm_sqr() + 2.0 * d2.norm_sqr()) + d2.conj() * d0 * d0 * 2.0;
    let i0 = d2 * dm2 * d0.conj() * 4.0;
    [-I * i2, -I * i0, -I * im2]
}

/// `dc/dt` of the ungauged physical system, in the order `(c₂, c₀, c₋₂)`.
pub fn e2_physical_rhs(c: [C64; 3]) -> [C64; 3] {
    let [c2, c0, cm2] = c;
    let (a, b, z) = (c2.norm_sqr(), cm2.norm_sqr(), c0.norm_sqr());
    let k = PI / 16.0;
    let i2 = (c2 * (3.0 * a + 6.0 * b + 4.0 * z) + cm2.conj() * c0 * c0 * 2.0) * k;
    let im2 = (cm2 * (3.0 * b + 6.0 * a + 4.0 * z) + c2.conj() * c0 * c0 * 2.0) * k;
    let i0 = (c0 * (4.0 * z + 4.0 * a + 4.0 * b) + c2 * cm2 * c0.conj() * 4.0) * k;
    [-I * i2, -I * i0, -I * im2]
}

/// Integrates the gauged system with fixed-step RK4 up to `tau_end`.
pub fn evolve_e2(s: &E2State, tau_end: f64, step: f64) -> Result<E2State> {
    let f = |_t: f64, y: &[C64], dy: &mut [C64]| {
        let d = e2_rhs(&E2State { d2: y[0], d0: y[1], dm2: y[2], tau: 0.0 });
        dy.copy_from_slice(&d);
    };
    let y = integrate(&f, s.tau, &s.as_array(), tau_end, EvolveOptions::rk4(step), |_, _| {})?;
    Ok(E2State { d2: y[0], d0: y[1], dm2: y[2], tau: tau_end })
}

/// Planar reduction `(C, ξ)` of the `E₂` flow at fixed `(M, P)`, with
/// `C = |d₀|` and `ξ = arg(d₂ d₋₂ d̄₀²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedE2State {
    pub c: f64,
    pub xi: f64,
    pub mass: f64,
    pub momentum: f64,
}

impl ReducedE2State {
    pub fn new(c: f64, xi: f64, mass: f64, momentum: f64) -> Result<Self> {
        if !(c >= 0.0) || c * c > mass - momentum.abs() + 1e-14 {
            return Err(CrError::InvalidArgument(format!(
                "need 0 <= C and C² <= M - |P| (C={c}, M={mass}, P={momentum})"
            )));
        }
        Ok(ReducedE2State { c, xi, mass, momentum })
    }

    pub fn from_e2(s: &E2State) -> Self {
        let xi = (s.d2 * s.dm2 * s.d0.conj() * s.d0.conj()).arg();
        ReducedE2State { c: s.d0.norm(), xi, mass: s.mass(), momentum: s.momentum() }
    }

    /// `(A, B) = (|d₂|, |d₋₂|)` from the conserved quantities.
    pub fn amplitudes(&self) -> (f64, f64) {
        let c2 = self.c * self.c;
        let a = (0.5 * (self.mass + self.momentum - c2)).max(0.0).sqrt();
        let b = (0.5 * (self.mass - self.momentum - c2)).max(0.0).sqrt();
        (a, b)
    }
}

/// `(Ċ, ξ̇)` of the planar reduction.
pub fn e2_reduced_rhs(s: &ReducedE2State) -> Result<(f64, f64)> {
    let (a, b) = s.amplitudes();
    if a == 0.0 || b == 0.0 {
        return Err(CrError::Singularity(format!(
            "A = {a}, B = {b}: the (C, ξ) chart needs both |d₂| and |d₋₂| nonzero"
        )));
    }
    let c2 = s.c * s.c;
    let cdot = 4.0 * a * b * s.c * s.xi.sin();
    let xidot = -a * a - b * b - 2.0 * (b * c2 / a + a * c2 / b - 4.0 * a * b) * s.xi.cos();
    Ok((cdot, xidot))
}

/// Labels of the `E₂` stationary-wave catalogue, plus waves found numerically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WaveKind {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
    Numerical,
}

/// Parameters of a catalogue wave. All phases are in radians; `sign`
/// selects the `±` branch of `d₀`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CatalogueSpec {
    /// `(z, 0, 0)`
    A { z: C64 },
    /// `(0, z, 0)`
    B { z: C64 },
    /// `(0, 0, z)`, written in the order `(d₂, d₋₂, d₀)`
    C { z: C64 },
    /// `(z, z', 0)` with `|z| = |z'|`
    D { z: C64, z2: C64 },
    /// `λ(√(2/9)e^{iβ₁}, √(2/9)e^{iβ₂}, ±i√(5/9)e^{i(β₁+β₂)/2})`
    E { lambda: f64, beta1: f64, beta2: f64, sign: f64 },
    /// `λ(√(2/7)e^{iβ₁}, √(2/7)e^{iβ₂}, ±√(3/7)e^{i(β₁+β₂)/2})`
    F { lambda: f64, beta1: f64, beta2: f64, sign: f64 },
    /// `(z, z', 0)` with `|z| ≠ |z'|`, both nonzero
    G { z: C64, z2: C64 },
    /// `(x e^{iβ₁}, y e^{iβ₂}, εz e^{i(β₁+β₂)/2})` with `x, y, ν` solved from `(z, μ)`
    H { z: f64, mu: f64, beta1: f64, beta2: f64, sign: f64 },
}

/// A solution `R_{-αωt} e^{-iωt} φ` of the resonant system. The stored
/// coefficients are those of `φ`; each mode `φ_{n,m}` then rotates at the
/// physical rate `ω(1 + α m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StationaryWave {
    pub kind: WaveKind,
    pub params: Vec<(&'static str, f64)>,
    pub omega: f64,
    pub rot_rate: f64,
    pub profile: SpectralState,
}

impl StationaryWave {
    /// Coefficients of the profile at another cutoff.
    pub fn coefficients(&self, cutoff: u32) -> SpectralState {
        self.profile.with_cutoff(cutoff)
    }

    /// Physical rate of mode `q`.
    pub fn rate(&self, q: ModeIndex) -> f64 {
        self.omega * (1.0 + self.rot_rate * q.m() as f64)
    }

    /// Exact solution at time `t` from the profile.
    pub fn at_time(&self, t: f64) -> SpectralState {
        let mut s = self.profile.clone();
        s.map_by_mode(|q| C64::from_polar(1.0, -self.rate(q) * t));
        s.time = self.profile.time + t;
        s
    }

    /// `‖ωφ + αωLφ − 𝒯(φ,φ,φ)‖`.
    pub fn el_residual(&self, system: &ResonantSystem) -> Result<f64> {
        let phi = self.profile.with_cutoff(system.cutoff());
        let t = system.nonlinearity(&phi)?;
        let mut lin = phi.clone();
        lin.map_by_mode(|q| C64::new(self.rate(q), 0.0));
        Ok(lin.distance(&t))
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| *k == name).map(|(_, v)| *v)
    }
}

fn out_of_range(msg: impl Into<String>) -> CrError {
    CrError::ParameterOutOfRange(msg.into())
}

/// Builds a wave from gauged data `d` and its `τ`-rates `ρ` (so that
/// `d_i(τ) = e^{iρ_i τ} d_i`), converting to physical `(ω, α)`.
fn wave_from_rates(kind: WaveKind, params: Vec<(&'static str, f64)>, d: [C64; 3], rho: [f64; 3]) -> Result<StationaryWave> {
    let mass: f64 = d.iter().map(|v| v.norm_sqr()).sum();
    let r = rho.map(|p| (4.0 * mass - p) * PI / 16.0);
    let present = d.map(|v| v.norm() > 0.0);
    let (omega, rot_rate) = if present[1] {
        let omega = r[1];
        let alpha = if present[0] && omega != 0.0 {
            (r[0] / omega - 1.0) / 2.0
        } else if present[2] && omega != 0.0 {
            (1.0 - r[2] / omega) / 2.0
        } else {
            0.0
        };
        (omega, alpha)
    } else if present[0] && present[2] {
        let omega = 0.5 * (r[0] + r[2]);
        let alpha = if omega != 0.0 { (r[0] - r[2]) / (4.0 * omega) } else { 0.0 };
        (omega, alpha)
    } else if present[0] {
        (r[0], 0.0)
    } else {
        (r[2], 0.0)
    };
    let modes = e2_modes();
    let profile = SpectralState::from_modes(2, &[(modes[0], d[0]), (modes[1], d[1]), (modes[2], d[2])])?;
    Ok(StationaryWave { kind, params, omega, rot_rate, profile })
}

fn unit_sign(sign: f64) -> Result<f64> {
    if sign == 1.0 || sign == -1.0 {
        Ok(sign)
    } else {
        Err(out_of_range(format!("sign must be +1 or -1, got {sign}")))
    }
}

/// `x²`, `y²`, `ν` of catalogue wave (h) for given `(z, μ)`.
pub fn catalogue_h_amplitudes(z: f64, mu: f64) -> Result<(f64, f64, f64)> {
    let z2 = z * z;
    if z2 == 0.0 {
        return Err(out_of_range("wave h needs z != 0"));
    }
    let in_left = mu <= -8.0 / 3.0 * z2;
    let in_right = mu >= 1.6 * z2 && mu < 8.0 * z2;
    if !(in_left || in_right) {
        return Err(out_of_range(format!(
            "wave h needs μ in (-∞, -8z²/3] ∪ [8z²/5, 8z²) = (-∞, {}] ∪ [{}, {}), got μ = {mu}",
            -8.0 / 3.0 * z2,
            1.6 * z2,
            8.0 * z2
        )));
    }
    let p = 8.0 * z2 - mu;
    let q = 8.0 * z2 - 3.0 * mu;
    let nu2 = q * q * (-1.0 / 16.0 + mu * mu / (p * p));
    let nu = nu2.max(0.0).sqrt();
    let x2 = mu * (mu / p - nu / q);
    let y2 = mu * (mu / p + nu / q);
    if x2 < -1e-12 || y2 < -1e-12 {
        return Err(out_of_range(format!("wave h: negative squared amplitude (x²={x2}, y²={y2})")));
    }
    Ok((x2.max(0.0), y2.max(0.0), nu))
}

/// Exact stationary and rotating waves on `E₂`.
pub fn stationary_wave(spec: CatalogueSpec) -> Result<StationaryWave> {
    let zero = C64::new(0.0, 0.0);
    match spec {
        CatalogueSpec::A { z } => {
            let mu = z.norm_sqr();
            wave_from_rates(WaveKind::A, vec![("re_z", z.re), ("im_z", z.im), ("mu", mu)], [z, zero, zero], [mu, 0.0, 0.0])
        }
        CatalogueSpec::B { z } => {
            let mu = z.norm_sqr();
            wave_from_rates(WaveKind::B, vec![("re_z", z.re), ("im_z", z.im), ("mu", mu)], [zero, zero, z], [0.0, 0.0, mu])
        }
        CatalogueSpec::C { z } => {
            wave_from_rates(WaveKind::C, vec![("re_z", z.re), ("im_z", z.im), ("mu", 0.0)], [zero, z, zero], [0.0; 3])
        }
        CatalogueSpec::D { z, z2 } => {
            if (z.norm() - z2.norm()).abs() > 1e-12 * z.norm().max(1.0) {
                return Err(out_of_range(format!("wave d needs |z| = |z'|, got {} and {}", z.norm(), z2.norm())));
            }
            let mu = -z.norm_sqr();
            let params = vec![("re_z", z.re), ("im_z", z.im), ("re_z2", z2.re), ("im_z2", z2.im), ("mu", mu)];
            wave_from_rates(WaveKind::D, params, [z, zero, z2], [mu, 0.0, mu])
        }
        CatalogueSpec::E { lambda, beta1, beta2, sign } => {
            let sign = unit_sign(sign)?;
            let mu = 8.0 / 9.0 * lambda * lambda;
            let a = lambda * (2.0f64 / 9.0).sqrt();
            let d = [
                C64::from_polar(a, beta1),
                I * sign * C64::from_polar(lambda * (5.0f64 / 9.0).sqrt(), 0.5 * (beta1 + beta2)),
                C64::from_polar(a, beta2),
            ];
            let params = vec![("lambda", lambda), ("beta1", beta1), ("beta2", beta2), ("sign", sign), ("mu", mu)];
            wave_from_rates(WaveKind::E, params, d, [mu; 3])
        }
        CatalogueSpec::F { lambda, beta1, beta2, sign } => {
            let sign = unit_sign(sign)?;
            let mu = -8.0 / 7.0 * lambda * lambda;
            let a = lambda * (2.0f64 / 7.0).sqrt();
            let d = [
                C64::from_polar(a, beta1),
                C64::from_polar(sign * lambda * (3.0f64 / 7.0).sqrt(), 0.5 * (beta1 + beta2)),
                C64::from_polar(a, beta2),
            ];
            let params = vec![("lambda", lambda), ("beta1", beta1), ("beta2", beta2), ("sign", sign), ("mu", mu)];
            wave_from_rates(WaveKind::F, params, d, [mu; 3])
        }
        CatalogueSpec::G { z, z2 } => {
            if z.norm() == 0.0 || z2.norm() == 0.0 {
                return Err(out_of_range("wave g needs z and z' nonzero"));
            }
            if (z.norm() - z2.norm()).abs() <= 1e-12 * z.norm().max(1.0) {
                return Err(out_of_range("wave g needs |z| != |z'|; the equal-modulus case is wave d"));
            }
            let (a, b) = (z.norm_sqr(), z2.norm_sqr());
            let rho = [a - 2.0 * b, 0.0, b - 2.0 * a];
            let params = vec![("re_z", z.re), ("im_z", z.im), ("re_z2", z2.re), ("im_z2", z2.im)];
            wave_from_rates(WaveKind::G, params, [z, zero, z2], rho)
        }
        CatalogueSpec::H { z, mu, beta1, beta2, sign } => {
            let sign = unit_sign(sign)?;
            let (x2, y2, nu) = catalogue_h_amplitudes(z, mu)?;
            let eps = if mu < 0.0 { C64::new(sign, 0.0) } else { I * sign };
            let d = [
                C64::from_polar(x2.sqrt(), beta1),
                eps * C64::from_polar(z, 0.5 * (beta1 + beta2)),
                C64::from_polar(y2.sqrt(), beta2),
            ];
            let params = vec![
                ("z", z),
                ("mu", mu),
                ("nu", nu),
                ("x", x2.sqrt()),
                ("y", y2.sqrt()),
                ("beta1", beta1),
                ("beta2", beta2),
                ("sign", sign),
            ];
            wave_from_rates(WaveKind::H, params, d, [mu + nu, mu, mu - nu])
        }
    }
}

/// One representative of each catalogue family, used by tests and demos.
pub fn catalogue_examples() -> Vec<StationaryWave> {
    let specs = [
        CatalogueSpec::A { z: C64::new(0.6, 0.3) },
        CatalogueSpec::B { z: C64::new(-0.2, 0.9) },
        CatalogueSpec::C { z: C64::new(0.7, -0.4) },
        CatalogueSpec::D { z: C64::new(0.5, 0.0), z2: C64::from_polar(0.5, 1.1) },
        CatalogueSpec::E { lambda: 1.0, beta1: 0.0, beta2: 0.0, sign: 1.0 },
        CatalogueSpec::F { lambda: 1.0, beta1: 0.4, beta2: -1.0, sign: -1.0 },
        CatalogueSpec::G { z: C64::new(0.8, 0.1), z2: C64::new(0.0, 0.45) },
        CatalogueSpec::H { z: 0.5, mu: 1.0, beta1: 0.3, beta2: 0.7, sign: 1.0 },
        CatalogueSpec::H { z: 0.5, mu: -1.0, beta1: 0.0, beta2: 0.2, sign: -1.0 },
    ];
    specs.iter().map(|s| stationary_wave(*s).expect("catalogue representatives are in range")).collect()
}

/// Coordinates `c_0..=c_{n_max}` of `e^{iθ} e^{iνH} e^{iμ|x|²} S_λ h₀` on `h_n`:
/// `c_n = −e^{iθ} e^{iν(4n+2)} λ s^n / (s − 1)^{n+1}` with `s = (1−λ²)/2 + iμ`.
pub fn orbit_gaussian(theta: f64, nu: f64, mu: f64, lambda: f64, n_max: u32) -> Result<Vec<C64>> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(out_of_range(format!("λ must be positive, got {lambda}")));
    }
    let s = C64::new(0.5 * (1.0 - lambda * lambda), mu);
    let den = C64::new(-0.5 * (1.0 + lambda * lambda), mu);
    let ratio = s / den;
    let mut term = -C64::from_polar(lambda, theta) / den;
    let mut out = Vec::with_capacity(n_max as usize + 1);
    for n in 0..=n_max {
        out.push(term * C64::from_polar(1.0, nu * (4.0 * n as f64 + 2.0)));
        term *= ratio;
    }
    Ok(out)
}

/// Spectral state with `h_k`-coordinates `h[k]` (converted to `φ_{2k,0}`).
pub fn radial_state(h: &[C64], cutoff: u32) -> Result<SpectralState> {
    let mut s = SpectralState::zeros(cutoff);
    for (k, &c) in h.iter().enumerate() {
        let r = RadialIndex(k as u32);
        if c != C64::new(0.0, 0.0) || r.mode().n() <= cutoff {
            s.set(r.mode(), c * r.basis_sign())?;
        }
    }
    Ok(s)
}

/// `h_k`-coordinates of the radial part of a state.
pub fn radial_coordinates(state: &SpectralState) -> Vec<C64> {
    (0..=state.cutoff() / 2)
        .map(|k| {
            let r = RadialIndex(k);
            state.get(r.mode()) * r.basis_sign()
        })
        .collect()
}

/// Best orbit point found by [`distance_to_gaussian_orbit`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitFit {
    pub distance: f64,
    pub theta: f64,
    pub nu: f64,
    pub mu: f64,
    pub lambda: f64,
}

/// Number of local searches in [`distance_to_gaussian_orbit`].
pub const ORBIT_STARTS: usize = 16;

/// Upper bound on the `L²` distance from `state` to the Gaussian orbit.
///
/// The phase `θ` is optimized in closed form; `(ν, μ, ln λ)` by Nelder–Mead
/// from the identity and 15 seeded starts. Non-radial mass counts fully
/// toward the distance, and the orbit is compared with its full (untruncated)
/// unit mass.
pub fn distance_to_gaussian_orbit(state: &SpectralState) -> OrbitFit {
    let h = radial_coordinates(state);
    let total = state.mass();
    let kmax = h.len() as u32 - 1;
    let overlap = |x: &[f64]| -> C64 {
        let w = orbit_gaussian(0.0, x[0], x[1], x[2].exp(), kmax).expect("λ = e^x > 0");
        h.iter().zip(&w).map(|(c, w)| c * w.conj()).sum()
    };
    let objective = |x: &[f64]| -> f64 {
        if !x[2].is_finite() || x[2].abs() > 30.0 {
            return f64::INFINITY;
        }
        total + 1.0 - 2.0 * overlap(x).norm()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x6f72_6269_74);
    let mut starts = vec![[0.0, 0.0, 0.0]];
    while starts.len() < ORBIT_STARTS {
        starts.push([rng.gen_range(0.0..0.5 * PI), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
    }
    let opts = NelderMeadOptions { max_iter: 3000, f_tol: 1e-16, x_tol: 1e-11 };
    let mut best: Option<(f64, Vec<f64>)> = None;
    for x0 in starts {
        let m = nelder_mead(objective, &x0, 0.2, opts);
        let m = nelder_mead(objective, &m.x, 1e-3, opts);
        if best.as_ref().is_none_or(|(v, _)| m.value < *v) {
            best = Some((m.value, m.x));
        }
    }
    let (value, x) = best.expect("at least one start");
    let theta = overlap(&x).arg();
    OrbitFit { distance: value.max(0.0).sqrt(), theta, nu: x[0], mu: x[1], lambda: x[2].exp() }
}
