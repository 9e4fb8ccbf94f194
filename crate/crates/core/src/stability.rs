//! Linear stability of the Lowest-Landau-Level waves `φ_{N,N} e^{-iω_N t}`,
//! constrained extremization of the energy, and decay diagnostics.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::basis::ModeIndex;
use crate::coefficients::lll_coeff;
use crate::error::{CrError, Result};
use crate::resonant::ResonantSystem;
use crate::state::{modes, SpectralState};
use crate::subspaces::{StationaryWave, WaveKind};
use crate::C64;

/// The 2×2 block coupling `c_k` and `c_{2N-k}` in the linearization around
/// `φ_{N,N}`. Writing `c_k = e^{-iωt}x`, `c_{2N-k} = e^{-iωt}y`:
///
/// ```text
/// i ẋ = A ȳ + (2B − ω) x
/// i ẏ = A x̄ + (2C − ω) y
/// ```
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearBlock {
    pub n: u32,
    pub k: u32,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub omega: f64,
    pub delta: f64,
}

impl LinearBlock {
    pub fn new(n: u32, k: u32) -> Self {
        assert!(k <= 2 * n && k != n, "block index k={k} invalid for N={n}");
        let j = 2 * n - k;
        let a = lll_coeff(k, j, n, n);
        let b = lll_coeff(k, n, k, n);
        let c = lll_coeff(j, n, j, n);
        let omega = lll_coeff(n, n, n, n);
        let s = b + c - omega;
        LinearBlock { n, k, a, b, c, omega, delta: 4.0 * (a - s) * (a + s) }
    }

    /// Exponents `s` of the solutions `x ∝ e^{st}` of
    /// `ẍ + i(2B−2C)ẋ − (A² − (2C−ω)(2B−ω))x = 0`.
    pub fn exponents(&self) -> [C64; 2] {
        let p = C64::new(0.0, 2.0 * (self.b - self.c));
        let q = -(self.a * self.a - (2.0 * self.c - self.omega) * (2.0 * self.b - self.omega));
        let root = (p * p - 4.0 * q).sqrt();
        [(-p + root) / 2.0, (-p - root) / 2.0]
    }

    /// Largest real part of the exponents; positive iff the block is unstable.
    pub fn growth_rate(&self) -> f64 {
        self.exponents().iter().map(|s| s.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_unstable(&self) -> bool {
        self.delta > 0.0
    }
}

/// Linearization of the LLL flow around `φ_{N,N} e^{-iω_N t}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LllLinearization {
    pub n: u32,
    /// `ω_N = α_{NNNN}`; the self-equation `i ż = ω_N (z + z̄)` grows at most linearly.
    pub omega: f64,
    /// Blocks for `k = 0..N-1`, each paired with `2N − k`.
    pub blocks: Vec<LinearBlock>,
}

impl LllLinearization {
    /// Phase rate `2α_{kNkN}` of the decoupled modes `k ≥ 2N + 1`.
    pub fn decoupled_rate(&self, k: u32) -> f64 {
        assert!(k > 2 * self.n, "mode {k} is coupled");
        2.0 * lll_coeff(k, self.n, k, self.n)
    }
}

pub fn lll_linearization(n: u32) -> LllLinearization {
    LllLinearization { n, omega: lll_coeff(n, n, n, n), blocks: (0..n).map(|k| LinearBlock::new(n, k)).collect() }
}

/// `Δ(N, k) = 4(A² − (B + C − ω)²)`.
pub fn discriminant(n: u32, k: u32) -> f64 {
    LinearBlock::new(n, k).delta
}

/// `#{k < N : Δ(N, k) > 0}`.
pub fn unstable_mode_count(n: u32) -> usize {
    (0..n).filter(|&k| discriminant(n, k) > 0.0).count()
}

/// Least-squares line `y = slope·x + intercept` with its `r²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LineFit { slope, intercept: my - slope * mx, r_squared })
}

/// Growth of the block constants along `k = round(λN)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockAsymptotics {
    /// Slopes of `ln A`, `ln B`, `ln C` against `N`.
    pub slope_a: f64,
    pub slope_b: f64,
    pub slope_c: f64,
    /// Slope of `ln ω` against `ln N`.
    pub omega_power: f64,
}

pub fn block_asymptotics(lambda: f64, ns: &[u32]) -> BlockAsymptotics {
    let blocks: Vec<LinearBlock> =
        ns.iter().map(|&n| LinearBlock::new(n, ((lambda * n as f64).round() as u32).min(n - 1))).collect();
    let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let logx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let slope = |f: fn(&LinearBlock) -> f64| {
        let y: Vec<f64> = blocks.iter().map(|b| f(b).ln()).collect();
        fit_line(&x, &y).map_or(f64::NAN, |l| l.slope)
    };
    let y: Vec<f64> = blocks.iter().map(|b| b.omega.ln()).collect();
    BlockAsymptotics {
        slope_a: slope(|b| b.a),
        slope_b: slope(|b| b.b),
        slope_c: slope(|b| b.c),
        omega_power: fit_line(&logx, &y).map_or(f64::NAN, |l| l.slope),
    }
}

/// Constraint surface for [`find_stationary`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Constraint {
    /// `M = μ₀`
    Mass { mu0: f64 },
    /// `M + αP = μ₀`
    MassMomentum { alpha: f64, mu0: f64 },
    /// `M = μ₀` and `P = p₀`
    MassAndMomentum { mu0: f64, p0: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

#[derive(Clone, Debug)]
pub struct FindOptions {
    /// Modes allowed in the seed; `None` means every mode of the system.
    pub support: Option<Vec<ModeIndex>>,
    pub max_iter: usize,
    /// Target Euler–Lagrange residual.
    pub tol: f64,
}

impl Default for FindOptions {
    fn default() -> Self {
        FindOptions { support: None, max_iter: 200_000, tol: 1e-11 }
    }
}

fn re_dot(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Normals of the constraint functions at `c` (real gradients up to a factor 2).
fn normals(c: &[C64], ms: &[f64], constraint: Constraint) -> Vec<Vec<C64>> {
    match constraint {
        Constraint::Mass { .. } => vec![c.to_vec()],
        Constraint::MassMomentum { alpha, .. } => vec![c.iter().zip(ms).map(|(v, m)| v * (1.0 + alpha * m)).collect()],
        Constraint::MassAndMomentum { .. } => {
            vec![c.to_vec(), c.iter().zip(ms).map(|(v, m)| v * *m).collect()]
        }
    }
}

/// Least-squares coefficients of `g` on the given vectors.
fn project_coeffs(g: &[C64], basis: &[Vec<C64>]) -> Vec<f64> {
    match basis.len() {
        1 => {
            let nn = re_dot(&basis[0], &basis[0]);
            vec![if nn > 0.0 { re_dot(&basis[0], g) / nn } else { 0.0 }]
        }
        _ => {
            let (a, b, d) = (re_dot(&basis[0], &basis[0]), re_dot(&basis[0], &basis[1]), re_dot(&basis[1], &basis[1]));
            let (r0, r1) = (re_dot(&basis[0], g), re_dot(&basis[1], g));
            let det = a * d - b * b;
            if det.abs() <= 1e-14 * (a * d).max(f64::MIN_POSITIVE) {
                // the momentum normal is parallel to the mass normal (single |m|)
                vec![if a > 0.0 { r0 / a } else { 0.0 }, 0.0]
            } else {
                vec![(r0 * d - r1 * b) / det, (a * r1 - b * r0) / det]
            }
        }
    }
}

/// Maps `c` back onto the constraint surface by mode-wise rescaling.
fn retract(c: &mut [C64], ms: &[f64], constraint: Constraint) -> bool {
    match constraint {
        Constraint::Mass { mu0 } | Constraint::MassMomentum { mu0, .. } => {
            let alpha = if let Constraint::MassMomentum { alpha, .. } = constraint { alpha } else { 0.0 };
            let g: f64 = c.iter().zip(ms).map(|(v, m)| (1.0 + alpha * m) * v.norm_sqr()).sum();
            if !(g > 0.0) {
                return false;
            }
            let s = (mu0 / g).sqrt();
            c.iter_mut().for_each(|v| *v *= s);
            true
        }
        Constraint::MassAndMomentum { mu0, p0 } => {
            let mut sums = [0.0; 3];
            for (v, m) in c.iter().zip(ms) {
                let w = v.norm_sqr();
                sums[0] += w;
                sums[1] += m * w;
                sums[2] += m * m * w;
            }
            let det = sums[0] * sums[2] - sums[1] * sums[1];
            let (s, t) = if det.abs() <= 1e-14 * sums[0] * sums[2] {
                if sums[0] <= 0.0 || (sums[1] / sums[0] * mu0 - p0).abs() > 1e-12 * mu0.max(1.0) {
                    return false;
                }
                (mu0 / sums[0], 0.0)
            } else {
                ((mu0 * sums[2] - p0 * sums[1]) / det, (sums[0] * p0 - sums[1] * mu0) / det)
            };
            if c.iter().zip(ms).any(|(v, m)| v.norm_sqr() > 0.0 && s + t * m < 0.0) {
                return false;
            }
            c.iter_mut().zip(ms).for_each(|(v, m)| *v *= (s + t * m).max(0.0).sqrt());
            true
        }
    }
}

/// Frequency, rotation rate and residual `‖𝒯(c) − ω(1 + αm)c‖` of the best
/// fit of `𝒯(c)` by the constraint normals.
fn multipliers(t: &[C64], c: &[C64], ms: &[f64], constraint: Constraint) -> (f64, f64, f64) {
    let basis = normals(c, ms, constraint);
    let k = project_coeffs(t, &basis);
    let (omega, alpha) = match constraint {
        Constraint::Mass { .. } => (k[0], 0.0),
        Constraint::MassMomentum { alpha, .. } => (k[0], alpha),
        Constraint::MassAndMomentum { .. } => (k[0], if k[0] != 0.0 { k[1] / k[0] } else { 0.0 }),
    };
    let res: f64 = t
        .iter()
        .zip(c)
        .zip(ms)
        .map(|((tv, cv), m)| (tv - cv * (omega * (1.0 + alpha * m))).norm_sqr())
        .sum::<f64>()
        .sqrt();
    (omega, alpha, res)
}

fn gauge_fix(c: &mut [C64]) {
    if let Some(big) = c.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())) {
        if big.norm() > 0.0 {
            let ph = big.conj() / big.norm();
            c.iter_mut().for_each(|v| *v *= ph);
        }
    }
}

/// Searches for a constrained extremizer of `E` by projected gradient
/// steps with backtracking, starting from a seeded random state.
///
/// On success the returned wave satisfies the Euler–Lagrange equation with
/// residual below `opts.tol`; otherwise the best iterate is returned inside
/// [`CrError::NotStationary`].
pub fn find_stationary(
    system: &ResonantSystem,
    constraint: Constraint,
    sense: Sense,
    seed: u64,
    opts: &FindOptions,
) -> Result<StationaryWave> {
    let cutoff = system.cutoff();
    let mu0 = match constraint {
        Constraint::Mass { mu0 } | Constraint::MassMomentum { mu0, .. } | Constraint::MassAndMomentum { mu0, .. } => mu0,
    };
    if !(mu0 > 0.0) {
        return Err(CrError::InvalidArgument(format!("constraint level must be positive, got {mu0}")));
    }
    let all: Vec<ModeIndex> = modes(cutoff).collect();
    let support = opts.support.clone().unwrap_or_else(|| all.clone());
    if support.iter().any(|q| q.n() > cutoff) {
        return Err(CrError::InvalidArgument(format!("support exceeds cutoff {cutoff}")));
    }
    let ms: Vec<f64> = all.iter().map(|q| q.m() as f64).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = vec![C64::new(0.0, 0.0); all.len()];
    let mut seeded = false;
    for _ in 0..100 {
        let mut s = SpectralState::zeros(cutoff);
        for &q in &support {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            s.set(q, C64::new(re, im))?;
        }
        c = s.into_coeffs();
        if retract(&mut c, &ms, constraint) {
            seeded = true;
            break;
        }
    }
    if !seeded {
        return Err(CrError::InvalidArgument("could not place a seed on the constraint surface".into()));
    }

    let sign = if sense == Sense::Max { 1.0 } else { -1.0 };
    let mut t = vec![C64::new(0.0, 0.0); c.len()];
    let mut trial = c.clone();
    let mut scratch = t.clone();
    let mut step = 0.1 / mu0;
    let mut energy = system.energy_of(&c);
    let mut residual = f64::INFINITY;
    let mut omega = 0.0;
    let mut alpha = 0.0;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        system.nonlinearity_into(&c, &mut t);
        (omega, alpha, residual) = multipliers(&t, &c, &ms, constraint);
        if residual < opts.tol {
            break;
        }
        iterations += 1;
        // tangential part of the gradient 4𝒯(c)
        let basis = normals(&c, &ms, constraint);
        let k = project_coeffs(&t, &basis);
        let mut dir: Vec<C64> = t.clone();
        for (b, kb) in basis.iter().zip(&k) {
            dir.iter_mut().zip(b).for_each(|(d, v)| *d -= v * *kb);
        }
        let slope = 4.0 * re_dot(&dir, &dir);
        if slope == 0.0 {
            break;
        }
        let mut accepted = false;
        for _ in 0..60 {
            trial.iter_mut().zip(&c).zip(&dir).for_each(|((x, cv), d)| *x = cv + d * (4.0 * sign * step));
            if retract(&mut trial, &ms, constraint) {
                let e = system.energy_of(&trial);
                let armijo = sign * (e - energy) >= 1e-4 * step * slope;
                // near the optimum the energy gain drops below rounding; fall
                // back to requiring a smaller stationarity residual
                let flat = (e - energy).abs() <= 1e3 * f64::EPSILON * energy.abs().max(f64::MIN_POSITIVE);
                let better = flat && {
                    system.nonlinearity_into(&trial, &mut scratch);
                    multipliers(&scratch, &trial, &ms, constraint).2 < residual
                };
                if armijo || better {
                    std::mem::swap(&mut c, &mut trial);
                    energy = e;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            // no measurable progress in floating point: stop at the best iterate
            break;
        }
        step *= 2.0;
    }
    gauge_fix(&mut c);
    let profile = SpectralState::from_coeffs(cutoff, c)?;
    let wave = StationaryWave {
        kind: WaveKind::Numerical,
        params: vec![
            ("seed", seed as f64),
            ("iterations", iterations as f64),
            ("energy", energy),
            ("residual", residual),
        ],
        omega,
        rot_rate: alpha,
        profile,
    };
    if residual < opts.tol {
        Ok(wave)
    } else {
        Err(CrError::NotStationary { iterations, residual, best: Box::new(wave) })
    }
}

/// Noise floor below which coefficients are ignored by [`decay_fit`].
pub const DECAY_FLOOR: f64 = 1e-13;

/// Outcome of [`decay_fit`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    /// `−slope` of `ln|c_{n,m}|` against `√(2n+2)`; infinite for compact support.
    pub mu_hat: f64,
    pub r_squared: f64,
    /// Slope of `ln|c_{n,m}|` against `n` (the geometric rate per level).
    pub per_level_slope: f64,
    pub points: usize,
    /// All usable coefficients sit on a single level.
    pub compact_support: bool,
}

/// Fits the decay of the coefficient moduli across levels.
pub fn decay_fit(state: &SpectralState) -> Result<DecayFit> {
    let pts: Vec<(f64, f64, u32)> = state
        .iter()
        .filter(|(_, c)| c.norm() > DECAY_FLOOR)
        .map(|(q, c)| ((2.0 * q.n() as f64 + 2.0).sqrt(), c.norm().ln(), q.n()))
        .collect();
    if pts.len() < 2 {
        return Err(CrError::InsufficientData(format!("{} usable coefficient(s) above {DECAY_FLOOR:e}", pts.len())));
    }
    if pts.iter().all(|p| p.2 == pts[0].2) {
        return Ok(DecayFit {
            mu_hat: f64::INFINITY,
            r_squared: 1.0,
            per_level_slope: f64::NEG_INFINITY,
            points: pts.len(),
            compact_support: true,
        });
    }
    if pts.len() < 4 {
        return Err(CrError::InsufficientData(format!("{} usable coefficients, need 4", pts.len())));
    }
    let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let n: Vec<f64> = pts.iter().map(|p| p.2 as f64).collect();
    let fit = fit_line(&x, &y).ok_or_else(|| CrError::InsufficientData("degenerate abscissae".into()))?;
    let per_level = fit_line(&n, &y).map_or(f64::NAN, |l| l.slope);
    Ok(DecayFit {
        mu_hat: -fit.slope,
        r_squared: fit.r_squared,
        per_level_slope: per_level,
        points: pts.len(),
        compact_support: false,
    })
}
