//! Dense coefficient vectors over the special Hermite modes up to a cutoff.

use crate::basis::ModeIndex;
use crate::error::{CrError, Result};
use crate::C64;

/// Number of valid modes `(n, m)` with `n <= cutoff`.
pub fn mode_count(cutoff: u32) -> usize {
    let c = cutoff as usize;
    (c + 1) * (c + 2) / 2
}

/// Storage slot of a mode: levels in increasing `n`, then `m` ascending.
pub fn mode_slot(mode: ModeIndex) -> usize {
    let n = mode.n() as usize;
    n * (n + 1) / 2 + ((mode.m() + mode.n() as i32) / 2) as usize
}

/// All valid modes with `n <= cutoff`, in storage order.
pub fn modes(cutoff: u32) -> impl Iterator<Item = ModeIndex> {
    (0..=cutoff).flat_map(|n| {
        (0..=n).map(move |j| ModeIndex::new_unchecked(n, 2 * j as i32 - n as i32))
    })
}

/// Finite set of coefficients `c_{n,m}` of `u = Σ c_{n,m} φ_{n,m}` together
/// with the time they refer to.
///
/// Invalid `(n, m)` pairs have no slot at all, so parity and range are
/// enforced by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralState {
    cutoff: u32,
    coeffs: Vec<C64>,
    pub time: f64,
}

impl SpectralState {
    pub fn zeros(cutoff: u32) -> Self {
        SpectralState { cutoff, coeffs: vec![C64::new(0.0, 0.0); mode_count(cutoff)], time: 0.0 }
    }

    pub fn from_coeffs(cutoff: u32, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != mode_count(cutoff) {
            return Err(CrError::InvalidArgument(format!(
                "cutoff {cutoff} needs {} coefficients, got {}",
                mode_count(cutoff),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(CrError::InvalidArgument("non-finite coefficient".into()));
        }
        Ok(SpectralState { cutoff, coeffs, time: 0.0 })
    }

    /// Builds a state from a sparse list of `(mode, value)` pairs.
    pub fn from_modes(cutoff: u32, entries: &[(ModeIndex, C64)]) -> Result<Self> {
        let mut s = Self::zeros(cutoff);
        for &(mode, v) in entries {
            s.set(mode, v)?;
        }
        Ok(s)
    }

    pub fn pure(mode: ModeIndex, cutoff: u32, value: C64) -> Result<Self> {
        Self::from_modes(cutoff, &[(mode, value)])
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    /// Coefficient of `mode`, zero above the cutoff.
    pub fn get(&self, mode: ModeIndex) -> C64 {
        if mode.n() > self.cutoff {
            C64::new(0.0, 0.0)
        } else {
            self.coeffs[mode_slot(mode)]
        }
    }

    pub fn set(&mut self, mode: ModeIndex, value: C64) -> Result<()> {
        if mode.n() > self.cutoff {
            return Err(CrError::CutoffExceeded { mode, cutoff: self.cutoff });
        }
        self.coeffs[mode_slot(mode)] = value;
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (ModeIndex, C64)> + '_ {
        modes(self.cutoff).zip(self.coeffs.iter().copied())
    }

    /// `M = Σ |c|²`.
    pub fn mass(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `P = Σ m |c|²`.
    pub fn momentum(&self) -> f64 {
        self.iter().map(|(q, c)| q.m() as f64 * c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.mass().sqrt()
    }

    pub fn scaled(&self, factor: C64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= factor);
        out
    }

    /// ℓ² distance, treating missing modes as zero.
    pub fn distance(&self, other: &SpectralState) -> f64 {
        let cutoff = self.cutoff.max(other.cutoff);
        modes(cutoff)
            .map(|q| (self.get(q) - other.get(q)).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Same coefficients at a different cutoff: zero-extended or truncated.
    pub fn with_cutoff(&self, cutoff: u32) -> Self {
        let mut out = Self::zeros(cutoff);
        let shared = mode_count(cutoff.min(self.cutoff));
        out.coeffs[..shared].copy_from_slice(&self.coeffs[..shared]);
        out.time = self.time;
        out
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Modes carrying a coefficient with modulus above `floor`.
    pub fn support(&self, floor: f64) -> Vec<ModeIndex> {
        self.iter().filter(|(_, c)| c.norm() > floor).map(|(q, _)| q).collect()
    }

    /// Applies `c_{n,m} -> f(n, m) c_{n,m}` in place.
    pub fn map_by_mode(&mut self, f: impl Fn(ModeIndex) -> C64) {
        for (q, c) in modes(self.cutoff).zip(self.coeffs.iter_mut()) {
            *c *= f(q);
        }
    }
}
