//! Flat key–value run configuration shared by the `cr` subcommands.
//!
//! Every key is optional; missing keys take the defaults of the chosen
//! preset. Keys:
//!
//! | key | meaning |
//! |---|---|
//! | `preset` | `pure-mode`, `e2-catalogue`, `gaussian-orbit`, `random-seeded` |
//! | `family`, `cutoff` | coefficient table family and level cutoff |
//! | `table` | table file to load instead of building |
//! | `integrator`, `step`, `tol` | `rk4` with `step`, or `rk45` with `tol` |
//! | `t_end`, `sample_stride` | final time and output decimation |
//! | `seed` | RNG seed for `random-seeded` |
//! | `mode_n`, `mode_m`, `amplitude` | `pure-mode` data |
//! | `wave` | catalogue letter `a`..`h` for `e2-catalogue` |
//! | `orbit_theta`, `orbit_nu`, `orbit_mu`, `orbit_lambda` | `gaussian-orbit` data |
//! | `mass` | mass of `random-seeded` data |
//! | `s`, `b_list`, `t_grid` | Sobolev index, amplitudes and times for `compare-nls` |
//! | `out` | output path |

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::basis::ModeIndex;
use crate::coefficients::Family;
use crate::error::{CrError, Result};
use crate::integrate::Integrator;
use crate::state::{mode_count, SpectralState};
use crate::subspaces::{catalogue_examples, orbit_gaussian, radial_state};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    PureMode,
    E2Catalogue,
    GaussianOrbit,
    RandomSeeded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegratorKind {
    Rk4,
    Rk45,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Preset,
    pub family: Family,
    pub cutoff: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
    pub integrator: IntegratorKind,
    pub step: f64,
    pub tol: f64,
    pub t_end: f64,
    pub sample_stride: usize,
    pub seed: u64,
    pub mode_n: u32,
    pub mode_m: i32,
    pub amplitude: f64,
    pub wave: String,
    pub orbit_theta: f64,
    pub orbit_nu: f64,
    pub orbit_mu: f64,
    pub orbit_lambda: f64,
    pub mass: f64,
    pub s: f64,
    pub b_list: Vec<f64>,
    pub t_grid: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            preset: Preset::PureMode,
            family: Family::General2d,
            cutoff: 4,
            table: None,
            integrator: IntegratorKind::Rk4,
            step: 1e-3,
            tol: 1e-10,
            t_end: 1.0,
            sample_stride: 100,
            seed: 0,
            mode_n: 0,
            mode_m: 0,
            amplitude: 1.0,
            wave: "e".into(),
            orbit_theta: 0.0,
            orbit_nu: 0.0,
            orbit_mu: 0.5,
            orbit_lambda: 1.0,
            mass: 1.0,
            s: 1.5,
            b_list: vec![0.2, 0.1],
            t_grid: vec![0.5, 1.0],
            out: None,
        }
    }
}

impl RunConfig {
    /// Defaults for a preset.
    pub fn preset(preset: Preset) -> Self {
        let base = RunConfig { preset, ..RunConfig::default() };
        match preset {
            Preset::PureMode => base,
            Preset::E2Catalogue => RunConfig { cutoff: 2, t_end: 10.0, ..base },
            Preset::GaussianOrbit => RunConfig { cutoff: 8, ..base },
            Preset::RandomSeeded => RunConfig { cutoff: 6, ..base },
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CrError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CrError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CrError::Config(m));
        if !(self.step > 0.0) || !(self.tol > 0.0) {
            return bad(format!("step and tol must be positive (step={}, tol={})", self.step, self.tol));
        }
        if !self.t_end.is_finite() || self.t_end < 0.0 {
            return bad(format!("t_end must be finite and nonnegative, got {}", self.t_end));
        }
        if self.sample_stride == 0 {
            return bad("sample_stride must be at least 1".into());
        }
        if self.preset == Preset::E2Catalogue && self.cutoff < 2 {
            return bad(format!("e2-catalogue needs cutoff ≥ 2, got {}", self.cutoff));
        }
        Ok(())
    }

    pub fn integrator(&self) -> Integrator {
        match self.integrator {
            IntegratorKind::Rk4 => Integrator::Rk4 { step: self.step },
            IntegratorKind::Rk45 => Integrator::Rk45 { tol: self.tol },
        }
    }

    /// Initial data described by the preset keys.
    pub fn initial_state(&self) -> Result<SpectralState> {
        let cutoff = self.cutoff;
        match self.preset {
            Preset::PureMode => {
                let q = ModeIndex::new(self.mode_n, self.mode_m)?;
                SpectralState::pure(q, cutoff, C64::new(self.amplitude, 0.0))
            }
            Preset::E2Catalogue => {
                let letters = ["a", "b", "c", "d", "e", "f", "g", "h"];
                let idx = letters
                    .iter()
                    .position(|l| l.eq_ignore_ascii_case(&self.wave))
                    .ok_or_else(|| CrError::Config(format!("unknown catalogue wave `{}`", self.wave)))?;
                Ok(catalogue_examples()[idx].coefficients(cutoff))
            }
            Preset::GaussianOrbit => {
                let h = orbit_gaussian(self.orbit_theta, self.orbit_nu, self.orbit_mu, self.orbit_lambda, cutoff / 2)?;
                radial_state(&h, cutoff)
            }
            Preset::RandomSeeded => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let coeffs: Vec<C64> = (0..mode_count(cutoff))
                    .map(|_| {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = StandardNormal.sample(&mut rng);
                        C64::new(re, im)
                    })
                    .collect();
                let s = SpectralState::from_coeffs(cutoff, coeffs)?;
                let k = (self.mass / s.mass()).sqrt();
                Ok(s.scaled(C64::new(k, 0.0)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_keys() {
        let cfg = RunConfig::from_toml_str(
            "preset = \"e2-catalogue\"\nwave = \"f\"\ncutoff = 3\nintegrator = \"rk45\"\ntol = 1e-9\nfamily = \"general2d\"\n",
        )
        .unwrap();
        assert_eq!(cfg.preset, Preset::E2Catalogue);
        assert_eq!(cfg.integrator(), Integrator::Rk45 { tol: 1e-9 });
        assert_eq!(cfg.initial_state().unwrap().cutoff(), 3);
    }

    #[test]
    fn rejects_unknown_and_bad_values() {
        assert!(matches!(RunConfig::from_toml_str("colour = 3\n"), Err(CrError::Config(_))));
        assert!(matches!(RunConfig::from_toml_str("step = -1.0\n"), Err(CrError::Config(_))));
        assert!(matches!(RunConfig::from_toml_str("family = \"lowest\"\n"), Err(CrError::Config(_))));
    }

    #[test]
    fn round_trips() {
        let cfg = RunConfig { out: Some("x.csv".into()), ..RunConfig::preset(Preset::RandomSeeded) };
        assert_eq!(RunConfig::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg);
    }

    #[test]
    fn random_data_is_seeded_and_normalized() {
        let cfg = RunConfig { seed: 9, mass: 2.0, ..RunConfig::preset(Preset::RandomSeeded) };
        let a = cfg.initial_state().unwrap();
        assert_eq!(a, cfg.initial_state().unwrap());
        assert!((a.mass() - 2.0).abs() < 1e-12);
        let other = RunConfig { seed: 10, ..cfg }.initial_state().unwrap();
        assert!(a.distance(&other) > 0.1);
    }

    #[test]
    fn orbit_preset_is_nearly_unit_mass() {
        let cfg = RunConfig { cutoff: 60, ..RunConfig::preset(Preset::GaussianOrbit) };
        assert!((cfg.initial_state().unwrap().mass() - 1.0).abs() < 1e-6);
    }
}
