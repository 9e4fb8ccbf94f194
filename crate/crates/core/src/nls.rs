//! Cubic NLS with harmonic trapping, `i∂ₜu = Hu + |u|²u`, truncated to the
//! special Hermite modes and written in the interaction picture
//! `g(t) = e^{-itH}u(t)`:
//!
//! ```text
//! i ġ_{q4} = Σ e^{2itω} (α/π²) g_{q1} g_{q2} ḡ_{q3},   ω = n₁ + n₂ − n₃ − n₄,
//! ```
//!
//! the sum running over every quadruple with `m₁ + m₂ = m₃ + m₄`. Keeping
//! only `ω = 0` gives `𝒯/π²`, i.e. the CR flow in time `t/π²`.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use crate::coefficients::{CouplingTable, Family};
use crate::error::{CrError, Result};
use crate::integrate::{integrate, EvolveOptions, Integrator, VectorField};
use crate::resonant::{compile_terms, ResonantSystem, Term};
use crate::state::SpectralState;
use crate::C64;

/// `‖c‖_{ℋ^s} = (Σ (2(n+1))^s |c_{n,m}|²)^{1/2}`.
pub fn hs_norm(state: &SpectralState, s: f64) -> f64 {
    state.iter().map(|(q, c)| (2.0 * (q.n() as f64 + 1.0)).powf(s) * c.norm_sqr()).sum::<f64>().sqrt()
}

/// Interaction-picture coefficients with the Sobolev index they are measured in.
#[derive(Clone, Debug, PartialEq)]
pub struct NlsProfile {
    pub state: SpectralState,
    pub s: f64,
}

impl NlsProfile {
    pub fn new(state: SpectralState, s: f64) -> Result<Self> {
        if !(s >= 0.0) {
            return Err(CrError::InvalidArgument(format!("Sobolev index must be nonnegative, got {s}")));
        }
        Ok(NlsProfile { state, s })
    }

    pub fn norm(&self) -> f64 {
        hs_norm(&self.state, self.s)
    }
}

/// Compiled interaction-picture right-hand side.
#[derive(Clone, Debug)]
pub struct NlsSystem {
    cutoff: u32,
    terms: Vec<Term>,
}

impl NlsSystem {
    /// Requires a full-product table covering `cutoff`.
    pub fn new(table: &CouplingTable, cutoff: u32) -> Result<Self> {
        if table.family() != Family::FullProduct {
            return Err(CrError::TableMismatch(format!("NLS needs a full-product table, got {}", table.family())));
        }
        if table.cutoff() < cutoff {
            return Err(CrError::TableMismatch(format!("table cutoff {} is below {cutoff}", table.cutoff())));
        }
        let (mut terms, _) = compile_terms(table, cutoff);
        let k = 1.0 / (PI * PI);
        terms.iter_mut().for_each(|t| t.coef *= k);
        Ok(NlsSystem { cutoff, terms })
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    /// The system with every oscillating term removed.
    pub fn resonant_only(&self) -> NlsSystem {
        NlsSystem { cutoff: self.cutoff, terms: self.terms.iter().filter(|t| t.omega == 0).copied().collect() }
    }

    /// `Σ e^{2itω}(α/π²) g g ḡ`, the right side of `i ġ = …`.
    pub fn nonlinearity_into(&self, t: f64, g: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
        // e^{2itω} for the small integer range of ω
        let max_w = 4 * self.cutoff as i64;
        let phases: Vec<C64> = (-max_w..=max_w).map(|w| C64::from_polar(1.0, 2.0 * t * w as f64)).collect();
        for term in &self.terms {
            let ph = phases[(term.omega + max_w) as usize];
            out[term.out] += g[term.a] * g[term.b] * g[term.c].conj() * ph * term.coef;
        }
    }

    /// `ġ` at time `t`.
    pub fn nls_rhs(&self, profile: &NlsProfile, t: f64) -> Result<SpectralState> {
        if profile.state.cutoff() != self.cutoff {
            return Err(CrError::TableMismatch(format!(
                "profile cutoff {} differs from system cutoff {}",
                profile.state.cutoff(),
                self.cutoff
            )));
        }
        let mut out = SpectralState::zeros(self.cutoff);
        self.eval(t, profile.state.coeffs(), out.coeffs_mut());
        out.time = t;
        Ok(out)
    }
}

impl VectorField for NlsSystem {
    fn eval(&self, t: f64, y: &[C64], dy: &mut [C64]) {
        self.nonlinearity_into(t, y, dy);
        for o in dy.iter_mut() {
            *o = C64::new(o.im, -o.re);
        }
    }
}

/// One row of a comparison report.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorRow {
    pub b: f64,
    pub t: f64,
    /// `‖g(t) − f(t/π²)‖_{ℋ^s}`
    pub error_hs: f64,
    /// Reference scale `B³` of the leading term of the error bound.
    pub bound_b3: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ErrorReport {
    pub rows: Vec<ErrorRow>,
}

impl ErrorReport {
    pub fn error_at(&self, b: f64, t: f64) -> Option<f64> {
        self.rows.iter().find(|r| r.b == b && r.t == t).map(|r| r.error_hs)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "B,t,error_hs,bound_B3")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{}", r.b, r.t, r.error_hs, r.bound_b3)?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| CrError::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_csv(&mut w).and_then(|_| w.flush()).map_err(|e| CrError::io(path, e))
    }
}

/// Settings for [`compare_flows`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompareOptions {
    pub s: f64,
    pub integrator: Integrator,
    /// Rescale `u0` to unit `ℋ^s` norm before multiplying by `B`.
    pub normalize: bool,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions { s: 1.5, integrator: Integrator::Rk4 { step: 5e-3 }, normalize: true }
    }
}

/// Evolves `g` (full NLS) and `f` (CR) from `B·u0` for each `B` and records
/// `‖g(t) − f(t/π²)‖_{ℋ^s}` on the time grid.
pub fn compare_flows(
    u0: &SpectralState,
    t_grid: &[f64],
    b_list: &[f64],
    full: &NlsSystem,
    cr: &ResonantSystem,
    opts: CompareOptions,
) -> Result<ErrorReport> {
    if !(opts.s > 1.0) {
        return Err(CrError::InvalidArgument(format!("need s > 1, got {}", opts.s)));
    }
    if u0.cutoff() != full.cutoff() || u0.cutoff() != cr.cutoff() {
        return Err(CrError::TableMismatch("u0, NLS and CR cutoffs must agree".into()));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid.first().is_some_and(|&t| t <= 0.0) {
        return Err(CrError::InvalidArgument("time grid must be positive and increasing".into()));
    }
    let base = if opts.normalize {
        let n = hs_norm(u0, opts.s);
        if n == 0.0 {
            return Err(CrError::InvalidArgument("u0 is zero".into()));
        }
        u0.scaled(C64::new(1.0 / n, 0.0))
    } else {
        u0.clone()
    };
    let scaled_integrator = |i: Integrator| match i {
        Integrator::Rk4 { step } => Integrator::Rk4 { step: step / (PI * PI) },
        other => other,
    };
    let mut report = ErrorReport::default();
    for &b in b_list {
        let start = base.scaled(C64::new(b, 0.0));
        let mut g = start.coeffs().to_vec();
        let mut f = start.coeffs().to_vec();
        let mut t_prev = 0.0;
        for &t in t_grid {
            let go = EvolveOptions { integrator: opts.integrator, sample_stride: usize::MAX };
            g = integrate(full, t_prev, &g, t, go, |_, _| {})?;
            let fo = EvolveOptions { integrator: scaled_integrator(opts.integrator), sample_stride: usize::MAX };
            f = integrate(cr, t_prev / (PI * PI), &f, t / (PI * PI), fo, |_, _| {})?;
            let diff: Vec<C64> = g.iter().zip(&f).map(|(a, b)| a - b).collect();
            let diff = SpectralState::from_coeffs(u0.cutoff(), diff)?;
            report.rows.push(ErrorRow { b, t, error_hs: hs_norm(&diff, opts.s), bound_b3: b * b * b });
            t_prev = t;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::ModeIndex;
    use crate::coefficients::{build_table, BuildOptions};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn md(n: u32, m: i32) -> ModeIndex {
        ModeIndex::new(n, m).unwrap()
    }

    fn random_state(cutoff: u32, seed: u64) -> SpectralState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = (0..crate::state::mode_count(cutoff))
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        SpectralState::from_coeffs(cutoff, coeffs).unwrap()
    }

    #[test]
    fn hs_norm_examples() {
        let one = C64::new(1.0, 0.0);
        assert_abs_diff_eq!(hs_norm(&SpectralState::pure(md(0, 0), 2, one).unwrap(), 1.0), 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(hs_norm(&SpectralState::pure(md(2, 0), 2, one).unwrap(), 2.0), 6.0, epsilon = 1e-14);
        let s = random_state(3, 1);
        assert_abs_diff_eq!(hs_norm(&s, 0.0), s.mass().sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn resonant_part_is_cr_over_pi_squared() {
        let full = build_table(Family::FullProduct, 3, BuildOptions::default()).unwrap();
        let nls = NlsSystem::new(&full, 3).unwrap().resonant_only();
        let cr = ResonantSystem::from_table(&build_table(Family::General2d, 3, BuildOptions::default()).unwrap()).unwrap();
        let p = NlsProfile::new(random_state(3, 2), 1.5).unwrap();
        for t in [0.0, 0.4, 2.9] {
            let a = nls.nls_rhs(&p, t).unwrap();
            let b = cr.apply_t(&p.state).unwrap().scaled(C64::new(1.0 / (PI * PI), 0.0));
            assert!(a.distance(&b) < 1e-12);
        }
    }

    #[test]
    fn rhs_has_period_pi() {
        let full = build_table(Family::FullProduct, 3, BuildOptions::default()).unwrap();
        let nls = NlsSystem::new(&full, 3).unwrap();
        let p = NlsProfile::new(random_state(3, 3), 1.5).unwrap();
        for t in [0.0, 0.3, 1.7] {
            let a = nls.nls_rhs(&p, t).unwrap();
            let b = nls.nls_rhs(&p, t + PI).unwrap();
            assert!(a.distance(&b) < 1e-11);
        }
    }

    #[test]
    fn gaussian_feeds_radial_modes() {
        // the non-resonant couplings (0,0)³ → (2k,0) are ±π/2^{k+1}, so E₀ is not invariant
        let full = build_table(Family::FullProduct, 4, BuildOptions::default()).unwrap();
        let z = md(0, 0);
        assert_abs_diff_eq!(full.get(z, z, z, md(2, 0)), -PI / 4.0, epsilon = 1e-13);
        assert_abs_diff_eq!(full.get(z, z, z, md(4, 0)), PI / 8.0, epsilon = 1e-13);
    }

    #[test]
    fn mass_is_conserved() {
        let full = build_table(Family::FullProduct, 3, BuildOptions::default()).unwrap();
        let nls = NlsSystem::new(&full, 3).unwrap();
        let s = random_state(3, 4).scaled(C64::new(0.3, 0.0));
        let y = integrate(&nls, 0.0, s.coeffs(), 2.0, EvolveOptions::rk4(1e-3), |_, _| {}).unwrap();
        let m1: f64 = y.iter().map(|c| c.norm_sqr()).sum();
        assert!((m1 - s.mass()).abs() < 1e-10 * s.mass());
    }

    #[test]
    fn wrong_family_is_rejected() {
        let t = build_table(Family::General2d, 2, BuildOptions::default()).unwrap();
        assert!(matches!(NlsSystem::new(&t, 2), Err(CrError::TableMismatch(_))));
    }

    #[test]
    fn single_level_cutoff_has_no_error() {
        let full = build_table(Family::FullProduct, 0, BuildOptions::default()).unwrap();
        let nls = NlsSystem::new(&full, 0).unwrap();
        let cr = ResonantSystem::from_table(&full.resonant_part()).unwrap();
        let u0 = SpectralState::pure(md(0, 0), 0, C64::new(1.0, 0.0)).unwrap();
        let r = compare_flows(&u0, &[1.0, 5.0], &[0.5], &nls, &cr, CompareOptions::default()).unwrap();
        assert!(r.rows.iter().all(|row| row.error_hs < 1e-10));
    }
}
