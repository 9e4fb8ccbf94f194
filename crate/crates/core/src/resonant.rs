//! The truncated resonant system `i ċ = 𝒯(c, c, c)` on a [`SpectralState`].

use crate::basis::{fourier_phase, ModeIndex};
use crate::coefficients::{CouplingTable, Family};
use crate::error::{CrError, Result};
use crate::state::{mode_slot, modes, SpectralState};
use crate::C64;

/// One trilinear term `out += coef · c_a c_b c̄_c`, oscillating like
/// `e^{2itω}` in the interaction picture.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Term {
    pub out: usize,
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub coef: f64,
    pub omega: i64,
}

/// Canonical entry `(P, Q)` expanded for the energy: `weight · c_a c_b c̄_c c̄_d`
/// plus its conjugate when `P ≠ Q`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct EnergyTerm {
    a: usize,
    b: usize,
    c: usize,
    d: usize,
    weight: f64,
    diagonal: bool,
}

fn pair_mult(x: ModeIndex, y: ModeIndex) -> f64 {
    if x == y {
        1.0
    } else {
        2.0
    }
}

/// Expands canonical table entries into per-output trilinear terms. Entries
/// touching modes above `cutoff` are dropped.
pub(crate) fn compile_terms(table: &CouplingTable, cutoff: u32) -> (Vec<Term>, Vec<EnergyTerm>) {
    let mut terms = Vec::new();
    let mut energy = Vec::new();
    for e in table.entries() {
        let [a, b, c, d] = e.key.q;
        if e.key.max_level() > cutoff {
            continue;
        }
        let (sa, sb, sc, sd) = (mode_slot(a), mode_slot(b), mode_slot(c), mode_slot(d));
        let mp = pair_mult(a, b);
        let mq = pair_mult(c, d);
        let omega = e.key.omega();
        let same = (a, b) == (c, d);
        terms.push(Term { out: sd, a: sa, b: sb, c: sc, coef: e.value * mp, omega });
        if c != d {
            terms.push(Term { out: sc, a: sa, b: sb, c: sd, coef: e.value * mp, omega });
        }
        if !same {
            terms.push(Term { out: sb, a: sc, b: sd, c: sa, coef: e.value * mq, omega: -omega });
            if a != b {
                terms.push(Term { out: sa, a: sc, b: sd, c: sb, coef: e.value * mq, omega: -omega });
            }
        }
        energy.push(EnergyTerm {
            a: sa,
            b: sb,
            c: sc,
            d: sd,
            weight: e.value * mp * mq,
            diagonal: same,
        });
    }
    terms.sort_by_key(|t| (t.out, t.a, t.b, t.c));
    (terms, energy)
}

/// Compiled right-hand side of the resonant system at a fixed cutoff.
#[derive(Clone, Debug)]
pub struct ResonantSystem {
    cutoff: u32,
    family: Family,
    terms: Vec<Term>,
    energy: Vec<EnergyTerm>,
}

impl ResonantSystem {
    /// Compiles `table` for states with the given cutoff.
    pub fn new(table: &CouplingTable, cutoff: u32) -> Result<Self> {
        if !table.family().is_resonant() {
            return Err(CrError::TableMismatch(format!(
                "the resonant system needs a resonant family, got {}",
                table.family()
            )));
        }
        if table.cutoff() < cutoff {
            return Err(CrError::TableMismatch(format!(
                "table cutoff {} is below state cutoff {cutoff}",
                table.cutoff()
            )));
        }
        let (terms, energy) = compile_terms(table, cutoff);
        Ok(ResonantSystem { cutoff, family: table.family(), terms, energy })
    }

    /// Compiles at the table's own cutoff.
    pub fn from_table(table: &CouplingTable) -> Result<Self> {
        Self::new(table, table.cutoff())
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Number of trilinear terms evaluated per right-hand side.
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    fn check(&self, state: &SpectralState) -> Result<()> {
        if state.cutoff() != self.cutoff {
            return Err(CrError::TableMismatch(format!(
                "state cutoff {} differs from system cutoff {}",
                state.cutoff(),
                self.cutoff
            )));
        }
        Ok(())
    }

    /// `𝒯(c, c, c)` into `out` (overwritten).
    pub fn nonlinearity_into(&self, c: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
        for t in &self.terms {
            out[t.out] += c[t.a] * c[t.b] * c[t.c].conj() * t.coef;
        }
    }

    /// `ċ = -i 𝒯(c, c, c)` into `out`.
    pub fn rhs_into(&self, c: &[C64], out: &mut [C64]) {
        self.nonlinearity_into(c, out);
        for o in out.iter_mut() {
            *o = C64::new(o.im, -o.re);
        }
    }

    /// `𝒯(u, u, u)`, the right-hand side of `i ∂ₜu = 𝒯(u,u,u)`.
    pub fn nonlinearity(&self, state: &SpectralState) -> Result<SpectralState> {
        self.check(state)?;
        let mut out = SpectralState::zeros(self.cutoff);
        self.nonlinearity_into(state.coeffs(), out.coeffs_mut());
        out.time = state.time;
        Ok(out)
    }

    /// The time derivative `ċ`.
    pub fn apply_t(&self, state: &SpectralState) -> Result<SpectralState> {
        self.check(state)?;
        let mut out = SpectralState::zeros(self.cutoff);
        self.rhs_into(state.coeffs(), out.coeffs_mut());
        out.time = state.time;
        Ok(out)
    }

    pub(crate) fn energy_of(&self, c: &[C64]) -> f64 {
        self.energy
            .iter()
            .map(|e| {
                let p = c[e.a] * c[e.b];
                if e.diagonal {
                    e.weight * p.norm_sqr()
                } else {
                    2.0 * e.weight * (p * (c[e.c] * c[e.d]).conj()).re
                }
            })
            .sum()
    }

    /// `E = Σ α c₁c₂c̄₃c̄₄` over ordered resonant quadruples.
    pub fn hamiltonian(&self, state: &SpectralState) -> Result<f64> {
        self.check(state)?;
        Ok(self.energy_of(state.coeffs()))
    }

    /// All monitored quantities, including the energy.
    pub fn conserved(&self, state: &SpectralState) -> Result<ConservedSet> {
        let e = self.hamiltonian(state)?;
        Ok(ConservedSet::quadratic(state, e))
    }
}

/// Right-hand side with a table compiled on the fly.
pub fn apply_t(state: &SpectralState, table: &CouplingTable) -> Result<SpectralState> {
    ResonantSystem::new(table, state.cutoff())?.apply_t(state)
}

/// Hamiltonian with a table compiled on the fly.
pub fn hamiltonian(state: &SpectralState, table: &CouplingTable) -> Result<f64> {
    ResonantSystem::new(table, state.cutoff())?.hamiltonian(state)
}

/// Invariants of the flow evaluated on a state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConservedSet {
    pub mass: f64,
    pub momentum: f64,
    pub hamiltonian: f64,
    /// `⟨Hu, u⟩`
    pub h_expect: f64,
    /// `⟨a_d u, u⟩`
    pub ad_expect: C64,
    /// `⟨a_g u, u⟩`
    pub ag_expect: C64,
    /// `∫ |z|² |u|²`
    pub zsq_expect: f64,
    /// `⟨x·∇u, u⟩`
    pub dilation: C64,
}

impl ConservedSet {
    /// Everything except the energy, which is supplied by the caller.
    pub fn quadratic(state: &SpectralState, hamiltonian: f64) -> Self {
        let mut h_expect = 0.0;
        let mut ad = C64::new(0.0, 0.0);
        let mut ag = C64::new(0.0, 0.0);
        let mut zsq = 0.0;
        let mut dil = C64::new(0.0, 0.0);
        for (q, c) in state.iter() {
            let (n, m) = (q.n() as f64, q.m() as f64);
            h_expect += 2.0 * (n + 1.0) * c.norm_sqr();
            zsq += (n + 1.0) * c.norm_sqr();
            dil -= c.norm_sqr();
            let nn = q.n();
            let up = |dm: i32| ModeIndex::new(nn + 1, q.m() + dm).ok();
            if let Some(u) = up(1) {
                ad += state.get(u) * c.conj() * ((n + m + 2.0) / 2.0).sqrt();
            }
            if let Some(u) = up(-1) {
                ag += state.get(u) * c.conj() * ((n - m + 2.0) / 2.0).sqrt();
            }
            if nn >= 2 && q.m().unsigned_abs() <= nn - 2 {
                let low = state.get(ModeIndex::new_unchecked(nn - 2, q.m()));
                let k = (n * n - m * m).sqrt() / 2.0;
                zsq += 2.0 * k * (c * low.conj()).re;
                dil += (c * low.conj() - c.conj() * low) * k;
            }
        }
        ConservedSet {
            mass: state.mass(),
            momentum: state.momentum(),
            hamiltonian,
            h_expect,
            ad_expect: ad,
            ag_expect: ag,
            zsq_expect: zsq,
            dilation: dil,
        }
    }
}

/// `c_{n,m} → e^{-inπ/2} c_{n,m}`, the action of the Fourier transform.
pub fn fourier_map(state: &SpectralState) -> SpectralState {
    let mut s = state.clone();
    s.map_by_mode(|q| fourier_phase(q.n()));
    s
}

/// `u → e^{iλ} u`.
pub fn phase_map(state: &SpectralState, lambda: f64) -> SpectralState {
    state.scaled(C64::from_polar(1.0, lambda))
}

/// `c_{n,m} → e^{iλm} c_{n,m}`, i.e. `e^{iλL}`.
pub fn rotation_map(state: &SpectralState, lambda: f64) -> SpectralState {
    let mut s = state.clone();
    s.map_by_mode(|q| C64::from_polar(1.0, lambda * q.m() as f64));
    s
}

/// `c_{n,m} → e^{2iλ(n+1)} c_{n,m}`, i.e. `e^{iλH}`.
pub fn h_flow_map(state: &SpectralState, lambda: f64) -> SpectralState {
    let mut s = state.clone();
    s.map_by_mode(|q| C64::from_polar(1.0, 2.0 * lambda * (q.n() as f64 + 1.0)));
    s
}

/// Whether every nonzero coefficient lies on `{β_n n + β_m m = γ}`.
pub fn supported_on(state: &SpectralState, beta_n: i64, beta_m: i64, gamma: i64, floor: f64) -> bool {
    modes(state.cutoff())
        .zip(state.coeffs())
        .all(|(q, c)| c.norm() <= floor || beta_n * q.n() as i64 + beta_m * q.m() as i64 == gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{build_table, BuildOptions};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn md(n: u32, m: i32) -> ModeIndex {
        ModeIndex::new(n, m).unwrap()
    }

    fn general(cutoff: u32) -> ResonantSystem {
        ResonantSystem::from_table(&build_table(Family::General2d, cutoff, BuildOptions::default()).unwrap()).unwrap()
    }

    fn random_state(rng: &mut ChaCha8Rng, cutoff: u32) -> SpectralState {
        let coeffs = (0..crate::state::mode_count(cutoff))
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        SpectralState::from_coeffs(cutoff, coeffs).unwrap()
    }

    #[test]
    fn ground_state_rate() {
        let sys = general(2);
        let s = SpectralState::pure(md(0, 0), 2, C64::new(1.0, 0.0)).unwrap();
        let t = sys.nonlinearity(&s).unwrap();
        assert_abs_diff_eq!(t.get(md(0, 0)).re, PI / 2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(t.mass(), PI * PI / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_and_scaling() {
        let sys = general(3);
        assert_eq!(sys.apply_t(&SpectralState::zeros(3)).unwrap().mass(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = random_state(&mut rng, 3);
        let a = sys.apply_t(&s).unwrap();
        let b = sys.apply_t(&s.scaled(C64::new(2.0, 0.0))).unwrap();
        assert!(a.scaled(C64::new(8.0, 0.0)).distance(&b) < 1e-11);
    }

    #[test]
    fn energy_examples() {
        let sys = general(2);
        let s = SpectralState::pure(md(1, 1), 2, C64::new(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(sys.hamiltonian(&s).unwrap(), PI / 4.0, epsilon = 1e-13);
        let one = C64::new(1.0, 0.0);
        let s = SpectralState::from_modes(2, &[(md(2, 2), one), (md(2, -2), one), (md(2, 0), one)]).unwrap();
        assert_abs_diff_eq!(sys.hamiltonian(&s).unwrap(), PI / 4.0 * 11.5, epsilon = 1e-12);
        assert_eq!(sys.hamiltonian(&SpectralState::zeros(2)).unwrap(), 0.0);
    }

    #[test]
    fn energy_matches_ordered_sum() {
        let table = build_table(Family::General2d, 3, BuildOptions::default()).unwrap();
        let sys = ResonantSystem::from_table(&table).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = random_state(&mut rng, 3);
        let brute: C64 = table
            .ordered_entries()
            .map(|(k, v)| s.get(k.q[0]) * s.get(k.q[1]) * (s.get(k.q[2]) * s.get(k.q[3])).conj() * v)
            .sum();
        assert!(brute.im.abs() < 1e-12);
        assert_abs_diff_eq!(sys.hamiltonian(&s).unwrap(), brute.re, epsilon = 1e-11);
    }

    #[test]
    fn nonlinearity_matches_ordered_sum() {
        let table = build_table(Family::General2d, 3, BuildOptions::default()).unwrap();
        let sys = ResonantSystem::from_table(&table).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_state(&mut rng, 3);
        let mut brute = SpectralState::zeros(3);
        for (k, v) in table.ordered_entries() {
            let cur = brute.get(k.q[3]);
            brute.set(k.q[3], cur + s.get(k.q[0]) * s.get(k.q[1]) * s.get(k.q[2]).conj() * v).unwrap();
        }
        assert!(sys.nonlinearity(&s).unwrap().distance(&brute) < 1e-11);
    }

    #[test]
    fn mismatches_are_rejected() {
        let lll = build_table(Family::Lll, 2, BuildOptions::default()).unwrap();
        assert!(matches!(ResonantSystem::new(&lll, 3), Err(CrError::TableMismatch(_))));
        let full = build_table(Family::FullProduct, 1, BuildOptions::default()).unwrap();
        assert!(matches!(ResonantSystem::new(&full, 1), Err(CrError::TableMismatch(_))));
        let sys = ResonantSystem::new(&lll, 1).unwrap();
        assert!(sys.apply_t(&SpectralState::zeros(2)).is_err());
    }

    #[test]
    fn conserved_examples() {
        let one = C64::new(1.0, 0.0);
        let s = SpectralState::pure(md(0, 0), 2, one).unwrap();
        let c = ConservedSet::quadratic(&s, 0.0);
        assert_eq!((c.mass, c.momentum, c.h_expect), (1.0, 0.0, 2.0));
        assert_eq!(c.ad_expect, C64::new(0.0, 0.0));

        let s = SpectralState::from_modes(2, &[(md(0, 0), one), (md(1, 1), one)]).unwrap();
        assert_abs_diff_eq!(ConservedSet::quadratic(&s, 0.0).ad_expect.re, 1.0, epsilon = 1e-15);

        let s = SpectralState::pure(md(2, 0), 2, one).unwrap();
        let c = ConservedSet::quadratic(&s, 0.0);
        assert_eq!(c.zsq_expect, 3.0);
        assert_eq!(c.dilation, C64::new(-1.0, 0.0));
    }

    #[test]
    fn symmetry_map_examples() {
        let one = C64::new(1.0, 0.0);
        let s = SpectralState::pure(md(0, 0), 2, one).unwrap();
        assert_eq!(fourier_map(&s), s);
        let s = SpectralState::pure(md(2, 0), 2, one).unwrap();
        assert_eq!(fourier_map(&s).get(md(2, 0)), -one);
    }

    #[test]
    fn rhs_preserves_level_sets() {
        // data on E_2 ∪ nothing else: the derivative stays on n = 2
        let sys = general(4);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut s = random_state(&mut rng, 4);
        s.map_by_mode(|q| if q.n() == 2 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
        let d = sys.apply_t(&s).unwrap();
        assert!(supported_on(&d, 1, 0, 2, 0.0));
    }
}
