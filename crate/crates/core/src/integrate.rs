//! Explicit Runge–Kutta time stepping and trajectory output.

use std::io::Write;
use std::path::Path;

use crate::error::{CrError, Result};
use crate::resonant::{ConservedSet, ResonantSystem};
use crate::state::{modes, SpectralState};
use crate::C64;

/// A (possibly time-dependent) complex vector field `ẏ = f(t, y)`.
pub trait VectorField {
    fn eval(&self, t: f64, y: &[C64], dy: &mut [C64]);
}

impl VectorField for ResonantSystem {
    fn eval(&self, _t: f64, y: &[C64], dy: &mut [C64]) {
        self.rhs_into(y, dy);
    }
}

impl<F: Fn(f64, &[C64], &mut [C64])> VectorField for F {
    fn eval(&self, t: f64, y: &[C64], dy: &mut [C64]) {
        self(t, y, dy)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Integrator {
    /// Classical fourth-order Runge–Kutta with a fixed step, shortened
    /// uniformly so that `t_end` is hit exactly.
    Rk4 { step: f64 },
    /// Dormand–Prince 5(4) with mixed absolute/relative tolerance.
    Rk45 { tol: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions {
    pub integrator: Integrator,
    /// Keep every `sample_stride`-th step (the final time is always kept).
    pub sample_stride: usize,
}

impl EvolveOptions {
    pub fn rk4(step: f64) -> Self {
        EvolveOptions { integrator: Integrator::Rk4 { step }, sample_stride: usize::MAX }
    }

    pub fn rk45(tol: f64) -> Self {
        EvolveOptions { integrator: Integrator::Rk45 { tol }, sample_stride: usize::MAX }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.sample_stride = stride.max(1);
        self
    }
}

fn axpy(out: &mut [C64], y: &[C64], h: f64, terms: &[(&[C64], f64)]) {
    for i in 0..out.len() {
        let mut acc = C64::new(0.0, 0.0);
        for (k, w) in terms {
            acc += k[i] * *w;
        }
        out[i] = y[i] + acc * h;
    }
}

fn all_finite(y: &[C64]) -> bool {
    y.iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

/// One classical RK4 step in place.
pub fn rk4_step<F: VectorField + ?Sized>(f: &F, t: f64, y: &mut [C64], h: f64, work: &mut [Vec<C64>; 5]) {
    let [k1, k2, k3, k4, tmp] = work;
    f.eval(t, y, k1);
    axpy(tmp, y, 0.5 * h, &[(k1, 1.0)]);
    f.eval(t + 0.5 * h, tmp, k2);
    axpy(tmp, y, 0.5 * h, &[(k2, 1.0)]);
    f.eval(t + 0.5 * h, tmp, k3);
    axpy(tmp, y, h, &[(k3, 1.0)]);
    f.eval(t + h, tmp, k4);
    for i in 0..y.len() {
        y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
    }
}

// Dormand–Prince tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y` from `t0` to `t_end`, calling `sample` on every kept step
/// (and on the initial point). Returns the final state.
pub fn integrate<F: VectorField + ?Sized>(
    f: &F,
    t0: f64,
    y0: &[C64],
    t_end: f64,
    opts: EvolveOptions,
    mut sample: impl FnMut(f64, &[C64]),
) -> Result<Vec<C64>> {
    if !(t_end > t0) {
        return Err(CrError::InvalidArgument(format!("t_end {t_end} must exceed start time {t0}")));
    }
    let dim = y0.len();
    let mut y = y0.to_vec();
    let stride = opts.sample_stride.max(1);
    sample(t0, &y);
    match opts.integrator {
        Integrator::Rk4 { step } => {
            if !(step > 0.0) {
                return Err(CrError::InvalidArgument(format!("step {step} must be positive")));
            }
            let steps = ((t_end - t0) / step - 1e-9).ceil().max(1.0) as usize;
            let h = (t_end - t0) / steps as f64;
            let mut work: [Vec<C64>; 5] = std::array::from_fn(|_| vec![C64::new(0.0, 0.0); dim]);
            let mut last_good = t0;
            for i in 0..steps {
                let t = t0 + i as f64 * h;
                rk4_step(f, t, &mut y, h, &mut work);
                let t_new = if i + 1 == steps { t_end } else { t0 + (i + 1) as f64 * h };
                if !all_finite(&y) {
                    return Err(CrError::NonFinite { t: t_new, last_good_t: last_good });
                }
                last_good = t_new;
                if (i + 1) % stride == 0 || i + 1 == steps {
                    sample(t_new, &y);
                }
            }
        }
        Integrator::Rk45 { tol } => {
            if !(tol > 0.0) {
                return Err(CrError::InvalidArgument(format!("tolerance {tol} must be positive")));
            }
            let mut k: [Vec<C64>; 7] = std::array::from_fn(|_| vec![C64::new(0.0, 0.0); dim]);
            let mut tmp = vec![C64::new(0.0, 0.0); dim];
            let mut ynew = vec![C64::new(0.0, 0.0); dim];
            let mut t = t0;
            let mut h = (t_end - t0).min(1e-2);
            f.eval(t, &y, &mut k[0]);
            let mut accepted = 0usize;
            while t < t_end {
                let last = t + h >= t_end;
                if last {
                    h = t_end - t;
                }
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(CrError::StepUnderflow { t, tol });
                }
                let (k1, rest) = k.split_at_mut(1);
                let k1 = &k1[0];
                axpy(&mut tmp, &y, h, &[(k1, A21)]);
                f.eval(t + C2 * h, &tmp, &mut rest[0]);
                axpy(&mut tmp, &y, h, &[(k1, A31), (&rest[0], A32)]);
                f.eval(t + C3 * h, &tmp, &mut rest[1]);
                axpy(&mut tmp, &y, h, &[(k1, A41), (&rest[0], A42), (&rest[1], A43)]);
                f.eval(t + C4 * h, &tmp, &mut rest[2]);
                axpy(&mut tmp, &y, h, &[(k1, A51), (&rest[0], A52), (&rest[1], A53), (&rest[2], A54)]);
                f.eval(t + C5 * h, &tmp, &mut rest[3]);
                axpy(
                    &mut tmp,
                    &y,
                    h,
                    &[(k1, A61), (&rest[0], A62), (&rest[1], A63), (&rest[2], A64), (&rest[3], A65)],
                );
                f.eval(t + h, &tmp, &mut rest[4]);
                axpy(&mut ynew, &y, h, &[(k1, B1), (&rest[1], B3), (&rest[2], B4), (&rest[3], B5), (&rest[4], B6)]);
                f.eval(t + h, &ynew, &mut rest[5]);
                let mut err = 0.0;
                for i in 0..dim {
                    let e = (k1[i] * E1 + rest[1][i] * E3 + rest[2][i] * E4 + rest[3][i] * E5 + rest[4][i] * E6
                        + rest[5][i] * E7)
                        * h;
                    let sc = tol * (1.0 + y[i].norm().max(ynew[i].norm()));
                    err += (e.norm() / sc).powi(2);
                }
                let err = (err / dim.max(1) as f64).sqrt();
                if !err.is_finite() || !all_finite(&ynew) {
                    if h < 1e-14 * t.abs().max(1.0) {
                        return Err(CrError::NonFinite { t: t + h, last_good_t: t });
                    }
                    h *= 0.1;
                    continue;
                }
                if err <= 1.0 {
                    t = if last { t_end } else { t + h };
                    std::mem::swap(&mut y, &mut ynew);
                    let (k1, rest) = k.split_at_mut(1);
                    std::mem::swap(&mut k1[0], &mut rest[5]);
                    accepted += 1;
                    if accepted % stride == 0 || t >= t_end {
                        sample(t, &y);
                    }
                }
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                h *= factor;
            }
        }
    }
    Ok(y)
}

/// A state with its monitored invariants.
#[derive(Clone, Debug)]
pub struct Sample {
    pub state: SpectralState,
    pub conserved: ConservedSet,
}

/// Sequence of samples from [`evolve`].
#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    pub fn final_state(&self) -> &SpectralState {
        &self.samples.last().expect("trajectory always holds the initial sample").state
    }

    /// Largest relative deviation of `f(conserved)` from its initial value.
    pub fn relative_drift(&self, f: impl Fn(&ConservedSet) -> f64) -> f64 {
        let v0 = f(&self.samples[0].conserved);
        let scale = v0.abs().max(f64::MIN_POSITIVE);
        self.samples.iter().map(|s| (f(&s.conserved) - v0).abs() / scale).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let cutoff = match self.samples.first() {
            Some(s) => s.state.cutoff(),
            None => return Ok(()),
        };
        write!(w, "t,M,P,E,Hexp")?;
        for q in modes(cutoff) {
            write!(w, ",re_{n}_{m},im_{n}_{m}", n = q.n(), m = q.m())?;
        }
        writeln!(w)?;
        for s in &self.samples {
            let c = &s.conserved;
            write!(w, "{},{},{},{},{}", s.state.time, c.mass, c.momentum, c.hamiltonian, c.h_expect)?;
            for v in s.state.coeffs() {
                write!(w, ",{},{}", v.re, v.im)?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| CrError::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_csv(&mut w).and_then(|_| w.flush()).map_err(|e| CrError::io(path, e))
    }
}

/// Integrates the resonant system from `state.time` to `t_end`.
pub fn evolve(state: &SpectralState, system: &ResonantSystem, t_end: f64, opts: EvolveOptions) -> Result<Trajectory> {
    if state.cutoff() != system.cutoff() {
        return Err(CrError::TableMismatch(format!(
            "state cutoff {} differs from system cutoff {}",
            state.cutoff(),
            system.cutoff()
        )));
    }
    let mut traj = Trajectory::default();
    let cutoff = state.cutoff();
    integrate(system, state.time, state.coeffs(), t_end, opts, |t, y| {
        let mut s = SpectralState::from_coeffs(cutoff, y.to_vec()).expect("finite by construction");
        s.time = t;
        let e = system.energy_of(y);
        let conserved = ConservedSet::quadratic(&s, e);
        traj.samples.push(Sample { state: s, conserved });
    })?;
    Ok(traj)
}

/// Final state only, without recording samples.
pub fn evolve_to(state: &SpectralState, system: &ResonantSystem, t_end: f64, integrator: Integrator) -> Result<SpectralState> {
    let opts = EvolveOptions { integrator, sample_stride: usize::MAX };
    let y = integrate(system, state.time, state.coeffs(), t_end, opts, |_, _| {})?;
    let mut s = SpectralState::from_coeffs(state.cutoff(), y)?;
    s.time = t_end;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::ModeIndex;
    use crate::coefficients::{build_table, BuildOptions, Family};
    use std::f64::consts::PI;

    fn decay(_t: f64, y: &[C64], dy: &mut [C64]) {
        // ẏ = -i y, exact solution e^{-it}
        for (d, v) in dy.iter_mut().zip(y) {
            *d = C64::new(v.im, -v.re);
        }
    }

    #[test]
    fn rk4_is_fourth_order() {
        let err = |h: f64| {
            let y = integrate(&decay, 0.0, &[C64::new(1.0, 0.0)], 2.0, EvolveOptions::rk4(h), |_, _| {}).unwrap();
            (y[0] - C64::from_polar(1.0, -2.0)).norm()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((14.0..18.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn rk45_meets_tolerance() {
        let y = integrate(&decay, 0.0, &[C64::new(1.0, 0.0)], 10.0, EvolveOptions::rk45(1e-10), |_, _| {}).unwrap();
        assert!((y[0] - C64::from_polar(1.0, -10.0)).norm() < 1e-8);
    }

    #[test]
    fn blow_up_is_reported() {
        // ẏ = y², finite-time blow-up at t = 1
        let f = |_t: f64, y: &[C64], dy: &mut [C64]| dy[0] = y[0] * y[0] * 1e6;
        let r = integrate(&f, 0.0, &[C64::new(1.0, 0.0)], 1.0, EvolveOptions::rk4(0.01), |_, _| {});
        assert!(matches!(r, Err(CrError::NonFinite { .. })));
    }

    #[test]
    fn ground_state_phase() {
        let table = build_table(Family::General2d, 1, BuildOptions::default()).unwrap();
        let sys = ResonantSystem::from_table(&table).unwrap();
        let s = SpectralState::pure(ModeIndex::new(0, 0).unwrap(), 1, C64::new(1.0, 0.0)).unwrap();
        let traj = evolve(&s, &sys, 1.0, EvolveOptions::rk4(1e-3)).unwrap();
        let c = traj.final_state().get(ModeIndex::new(0, 0).unwrap());
        assert!((c - C64::from_polar(1.0, -PI / 2.0)).norm() < 1e-10);
        assert_eq!(traj.final_state().time, 1.0);
    }

    #[test]
    fn csv_layout() {
        let table = build_table(Family::General2d, 1, BuildOptions::default()).unwrap();
        let sys = ResonantSystem::from_table(&table).unwrap();
        let s = SpectralState::pure(ModeIndex::new(0, 0).unwrap(), 1, C64::new(1.0, 0.0)).unwrap();
        let traj = evolve(&s, &sys, 0.1, EvolveOptions::rk4(0.01).with_stride(5)).unwrap();
        assert_eq!(traj.samples.len(), 3);
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(header, "t,M,P,E,Hexp,re_0_0,im_0_0,re_1_-1,im_1_-1,re_1_1,im_1_1");
        assert_eq!(text.lines().count(), 4);
    }
}
