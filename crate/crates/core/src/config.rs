//! Run configuration: a TOML document in lab units, validated and converted
//! to the SI angular units used by the rest of the crate.
//!
//! Every section and key is optional; omitted values take the defaults below.
//!
//! | key | unit | default |
//! |---|---|---|
//! | `model` | `perturbative` \| `two_level_ode` \| `three_level_dm` | `perturbative` |
//! | `output` | path | none (stdout) |
//! | `pulse.nu1_khz`, `pulse.nu2_khz` | kHz (cyclic) | 50, 150 |
//! | `pulse.phi1_deg`, `pulse.phi2_deg` | degrees | 0, 0 |
//! | `pulse.b1_ut`, `pulse.b2_ut` | µT, peak transverse field per carrier | 0.05, 0.05 |
//! | `pulse.fwhm_us` | µs | 130 |
//! | `pulse.visibility_match` | rescale B₁ so both paths are equal at ν₂ | false |
//! | `system.omega_khz` / `system.b0_ut` | kHz / µT, at most one of the two | 150 kHz |
//! | `system.gamma_per_s` | s⁻¹ | 0 |
//! | `system.equilibrium` | `mixed` \| `pumped` | `mixed` |
//! | `system.lande_g`, `system.bohr_magneton`, `system.hbar` | SI | ⁸⁷Rb F = 1, CODATA |
//! | `grid.omega_min_khz`, `grid.omega_max_khz` | kHz | 100, 200 |
//! | `grid.omega_points` | count | 201 |
//! | `grid.phases_deg` | list of φ₂, degrees | `[0]` |
//! | `grid.probe_weight_zero`, `grid.probe_weight_minus` | | 1, 1 |
//! | `integrator.rel_tol`, `integrator.abs_tol` | | 1e-9, 1e-12 |
//! | `integrator.max_step_us` | µs | unbounded |
//! | `integrator.t_cut_multiple` | FWHMs each side | 4 |
//! | `integrator.samples` | trajectory rows | 2048 |
//! | `peaks.min_height_frac`, `peaks.smooth_window` | | 0.2, 5 |

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::path::PathBuf;

use crate::constants::{AtomConstants, BOHR_MAGNETON, HBAR, LANDE_G_RB87_F1};
use crate::dynamics::IntegratorConfig;
use crate::error::{Error, Result};
use crate::perturbation::match_visibility;
use crate::pulse::PulseParams;
use crate::scan::{Model, ScanGrid, DEFAULT_MIN_HEIGHT_FRAC, DEFAULT_SMOOTH_WINDOW};
use crate::spin::{pumped_initial_state, DensityMatrix, ProbeWeights, SpinSystem};

/// Weak equal-amplitude drive, 50/150 kHz carriers, 130 µs pulse.
pub const DEFAULTS_PRESET: &str = include_str!("../configs/defaults.toml");
/// Strong single-carrier drive for the three-level spectra.
pub const FIG3A_PRESET: &str = include_str!("../configs/fig3a.toml");
/// Visibility-matched phase family.
pub const FIG4_PRESET: &str = include_str!("../configs/fig4.toml");

const US: f64 = 1e-6;
const UT: f64 = 1e-6;

fn khz(f: f64) -> f64 {
    TAU * 1e3 * f
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigDocument {
    pub model: Model,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub pulse: PulseSection,
    pub system: SystemSection,
    pub grid: GridSection,
    pub integrator: IntegratorSection,
    pub peaks: PeaksSection,
}

impl Default for ConfigDocument {
    fn default() -> Self {
        Self {
            model: Model::Perturbative,
            output: None,
            pulse: PulseSection::default(),
            system: SystemSection::default(),
            grid: GridSection::default(),
            integrator: IntegratorSection::default(),
            peaks: PeaksSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseSection {
    pub nu1_khz: f64,
    pub nu2_khz: f64,
    pub phi1_deg: f64,
    pub phi2_deg: f64,
    pub b1_ut: f64,
    pub b2_ut: f64,
    pub fwhm_us: f64,
    pub visibility_match: bool,
}

impl Default for PulseSection {
    fn default() -> Self {
        Self {
            nu1_khz: 50.0,
            nu2_khz: 150.0,
            phi1_deg: 0.0,
            phi2_deg: 0.0,
            b1_ut: 0.05,
            b2_ut: 0.05,
            fwhm_us: 130.0,
            visibility_match: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equilibrium {
    Mixed,
    Pumped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_khz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b0_ut: Option<f64>,
    pub gamma_per_s: f64,
    pub equilibrium: Equilibrium,
    pub lande_g: f64,
    pub bohr_magneton: f64,
    pub hbar: f64,
}

impl Default for SystemSection {
    fn default() -> Self {
        Self {
            omega_khz: None,
            b0_ut: None,
            gamma_per_s: 0.0,
            equilibrium: Equilibrium::Mixed,
            lande_g: LANDE_G_RB87_F1,
            bohr_magneton: BOHR_MAGNETON,
            hbar: HBAR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub omega_min_khz: f64,
    pub omega_max_khz: f64,
    pub omega_points: usize,
    pub phases_deg: Vec<f64>,
    pub probe_weight_zero: f64,
    pub probe_weight_minus: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            omega_min_khz: 100.0,
            omega_max_khz: 200.0,
            omega_points: 201,
            phases_deg: vec![0.0],
            probe_weight_zero: 1.0,
            probe_weight_minus: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSection {
    pub rel_tol: f64,
    pub abs_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_step_us: Option<f64>,
    pub t_cut_multiple: f64,
    pub samples: usize,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let d = IntegratorConfig::default();
        Self {
            rel_tol: d.rel_tol,
            abs_tol: d.abs_tol,
            max_step_us: None,
            t_cut_multiple: d.t_cut_multiple,
            samples: d.samples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeaksSection {
    pub min_height_frac: f64,
    pub smooth_window: usize,
}

impl Default for PeaksSection {
    fn default() -> Self {
        Self { min_height_frac: DEFAULT_MIN_HEIGHT_FRAC, smooth_window: DEFAULT_SMOOTH_WINDOW }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakSettings {
    pub min_height_frac: f64,
    pub smooth_window: usize,
}

/// A validated configuration. `document` is what was loaded (defaults filled
/// in); the other fields are its SI counterparts.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub document: ConfigDocument,
    pub pulse: PulseParams,
    pub system: SpinSystem,
    pub grid: ScanGrid,
    pub integrator: IntegratorConfig,
    pub peaks: PeakSettings,
    pub output: Option<PathBuf>,
}

/// Parses and validates a TOML document.
pub fn load_config(text: &str) -> Result<RunConfig> {
    let doc: ConfigDocument = toml::from_str(text).map_err(|e| Error::Parse(e.message().to_string()))?;
    RunConfig::from_document(doc)
}

pub fn load_config_file(path: &std::path::Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    load_config(&text)
}

fn finite(key: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(key, "must be finite"))
    }
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(key, format!("must be positive, got {v}")))
    }
}

fn non_negative(key: &str, v: f64) -> Result<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(key, format!("must be non-negative, got {v}")))
    }
}

impl RunConfig {
    pub fn from_document(doc: ConfigDocument) -> Result<Self> {
        let s = &doc.system;
        let constants = AtomConstants {
            lande_g: finite("system.lande_g", s.lande_g)?,
            bohr_magneton: positive("system.bohr_magneton", s.bohr_magneton)?,
            hbar: positive("system.hbar", s.hbar)?,
        };
        if constants.lande_g == 0.0 {
            return Err(Error::config("system.lande_g", "must be non-zero"));
        }
        let gamma = non_negative("system.gamma_per_s", s.gamma_per_s)?;
        let mut system = match (s.omega_khz, s.b0_ut) {
            (Some(_), Some(_)) => {
                return Err(Error::config("system.b0_ut", "give either system.omega_khz or system.b0_ut, not both"))
            }
            (None, Some(b0)) => SpinSystem::new(finite("system.b0_ut", b0)? * UT, gamma, constants)?,
            (w, None) => {
                let w = non_negative("system.omega_khz", w.unwrap_or(150.0))?;
                SpinSystem::from_splitting(khz(w), gamma, constants)?
            }
        };
        if s.equilibrium == Equilibrium::Pumped {
            system = system.with_equilibrium(pumped_initial_state());
        } else {
            system = system.with_equilibrium(DensityMatrix::maximally_mixed());
        }

        let pl = &doc.pulse;
        let mut pulse = PulseParams::with_constants(
            khz(positive("pulse.nu1_khz", pl.nu1_khz)?),
            khz(positive("pulse.nu2_khz", pl.nu2_khz)?),
            finite("pulse.phi1_deg", pl.phi1_deg)?.to_radians(),
            finite("pulse.phi2_deg", pl.phi2_deg)?.to_radians(),
            non_negative("pulse.b1_ut", pl.b1_ut)? * UT,
            non_negative("pulse.b2_ut", pl.b2_ut)? * UT,
            positive("pulse.fwhm_us", pl.fwhm_us)? * US,
            constants,
        )
        .map_err(|e| Error::config("pulse", e.to_string()))?;
        if pl.visibility_match {
            if pl.b2_ut == 0.0 {
                return Err(Error::config("pulse.visibility_match", "needs a non-zero pulse.b2_ut"));
            }
            pulse = match_visibility(&pulse, pulse.nu2()).map_err(|e| Error::config("pulse.visibility_match", e.to_string()))?;
        }

        let g = &doc.grid;
        let lo = positive("grid.omega_min_khz", g.omega_min_khz)?;
        let hi = positive("grid.omega_max_khz", g.omega_max_khz)?;
        if !(lo < hi) {
            return Err(Error::config("grid.omega_max_khz", format!("must exceed grid.omega_min_khz ({lo}), got {hi}")));
        }
        if g.omega_points < 2 {
            return Err(Error::config("grid.omega_points", format!("must be at least 2, got {}", g.omega_points)));
        }
        let mut phases = Vec::with_capacity(g.phases_deg.len());
        for &d in &g.phases_deg {
            phases.push(finite("grid.phases_deg", d)?.to_radians());
        }
        let weights = ProbeWeights {
            zero: non_negative("grid.probe_weight_zero", g.probe_weight_zero)?,
            minus: non_negative("grid.probe_weight_minus", g.probe_weight_minus)?,
        };
        let grid = ScanGrid {
            omega_min: khz(lo),
            omega_max: khz(hi),
            omega_points: g.omega_points,
            phase_values: phases,
            model: doc.model,
            probe_weights: weights,
        };

        let it = &doc.integrator;
        let integrator = IntegratorConfig {
            rel_tol: positive("integrator.rel_tol", it.rel_tol)?,
            abs_tol: positive("integrator.abs_tol", it.abs_tol)?,
            max_step: match it.max_step_us {
                Some(m) => positive("integrator.max_step_us", m)? * US,
                None => f64::INFINITY,
            },
            t_cut_multiple: positive("integrator.t_cut_multiple", it.t_cut_multiple)?,
            samples: it.samples,
        };
        if it.samples < 2 {
            return Err(Error::config("integrator.samples", format!("must be at least 2, got {}", it.samples)));
        }

        let pk = &doc.peaks;
        if !(0.0..=1.0).contains(&pk.min_height_frac) {
            return Err(Error::config("peaks.min_height_frac", format!("must lie in [0, 1], got {}", pk.min_height_frac)));
        }
        if pk.smooth_window == 0 {
            return Err(Error::config("peaks.smooth_window", "must be at least 1"));
        }
        let peaks = PeakSettings { min_height_frac: pk.min_height_frac, smooth_window: pk.smooth_window };

        Ok(Self { output: doc.output.clone(), document: doc, pulse, system, grid, integrator, peaks })
    }

    /// The loaded document as TOML, defaults included.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(&self.document).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Copy with the scan model replaced.
    pub fn with_model(&self, model: Model) -> Self {
        let mut c = self.clone();
        c.document.model = model;
        c.grid.model = model;
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_all_defaults() {
        let c = load_config("").unwrap();
        assert_eq!(c.document, ConfigDocument::default());
        assert!((c.pulse.nu1() - TAU * 50e3).abs() < 1e-9);
        assert!((c.pulse.fwhm() - 130e-6).abs() < 1e-18);
        assert_eq!(c.grid.omega_points, 201);
        assert_eq!(c.grid.phase_values, vec![0.0]);
        assert_eq!(c.integrator, IntegratorConfig::default());
        assert!((crate::spin::zeeman_splitting(&c.system) - TAU * 150e3).abs() < 1e-6);
    }

    #[test]
    fn presets_load_and_round_trip() {
        for text in [DEFAULTS_PRESET, FIG3A_PRESET, FIG4_PRESET] {
            let a = load_config(text).unwrap();
            let b = load_config(&a.to_toml().unwrap()).unwrap();
            assert_eq!(a, b);
        }
        let p = load_config(DEFAULTS_PRESET).unwrap();
        assert_eq!(p.document.pulse.nu1_khz, 50.0);
        assert_eq!(p.document.pulse.nu2_khz, 150.0);
        assert_eq!(p.document.pulse.fwhm_us, 130.0);
        assert_eq!(p.document.pulse.phi1_deg, 0.0);
    }

    #[test]
    fn unit_conversion() {
        let c = load_config(
            "[pulse]\nnu1_khz = 10\nphi1_deg = 90\nb1_ut = 2\nfwhm_us = 50\n[system]\nb0_ut = 3\n[integrator]\nmax_step_us = 0.5",
        )
        .unwrap();
        assert!((c.pulse.nu1() - TAU * 1e4).abs() < 1e-9);
        assert!((c.pulse.phi1() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((c.pulse.b1() - 2e-6).abs() < 1e-21);
        assert!((c.pulse.fwhm() - 50e-6).abs() < 1e-20);
        assert!((c.system.b0() - 3e-6).abs() < 1e-21);
        assert!((c.integrator.max_step - 0.5e-6).abs() < 1e-21);
    }

    #[test]
    fn errors_name_the_key() {
        let key = |text: &str| match load_config(text) {
            Err(Error::Config { key, .. }) => key,
            other => panic!("expected config error, got {other:?}"),
        };
        assert_eq!(key("[pulse]\nfwhm_us = 0"), "pulse.fwhm_us");
        assert_eq!(key("[pulse]\nnu1_khz = -1"), "pulse.nu1_khz");
        assert_eq!(key("[pulse]\nb2_ut = -1"), "pulse.b2_ut");
        assert_eq!(key("[system]\nomega_khz = 1\nb0_ut = 1"), "system.b0_ut");
        assert_eq!(key("[system]\ngamma_per_s = -1"), "system.gamma_per_s");
        assert_eq!(key("[grid]\nomega_min_khz = 200\nomega_max_khz = 100"), "grid.omega_max_khz");
        assert_eq!(key("[grid]\nomega_points = 1"), "grid.omega_points");
        assert_eq!(key("[integrator]\nrel_tol = 0"), "integrator.rel_tol");
        assert_eq!(key("[integrator]\nsamples = 1"), "integrator.samples");
        assert_eq!(key("[peaks]\nmin_height_frac = 2"), "peaks.min_height_frac");
        assert_eq!(key("[pulse]\nb2_ut = 0\nvisibility_match = true"), "pulse.visibility_match");
    }

    #[test]
    fn unknown_keys_rejected() {
        for text in ["colour = 1", "[pulse]\nnu3_khz = 1", "[lasers]\nx = 1", "model = \"rwa\""] {
            assert!(matches!(load_config(text), Err(Error::Parse(_))), "{text}");
        }
        match load_config("[pulse]\nnu3_khz = 1") {
            Err(Error::Parse(m)) => assert!(m.contains("nu3_khz"), "{m}"),
            _ => unreachable!(),
        }
    }

    #[test]
    fn visibility_match_equalizes_paths() {
        let c = load_config("[pulse]\nvisibility_match = true").unwrap();
        let pa = crate::perturbation::c_total(c.pulse.nu2(), &c.pulse).unwrap();
        assert!((pa.c1.norm() - pa.c3.norm()).abs() < 1e-12 * pa.c1.norm());
    }

    #[test]
    fn full_turn_phase_gives_same_signal() {
        let a = load_config("[pulse]\nphi2_deg = 0").unwrap();
        let b = load_config("[pulse]\nphi2_deg = 360").unwrap();
        for w in [140.0, 150.0, 160.0] {
            let x = crate::scan::excitation_signal(khz(w), &a.pulse, &a.system, Model::Perturbative, &a.integrator).unwrap();
            let y = crate::scan::excitation_signal(khz(w), &b.pulse, &b.system, Model::Perturbative, &b.integrator).unwrap();
            assert!((x - y).abs() <= 1e-12 * x);
        }
    }

    #[test]
    fn pumped_equilibrium() {
        let c = load_config("[system]\nequilibrium = \"pumped\"").unwrap();
        assert_eq!(c.system.rho_eq().populations(), [1.0, 0.0, 0.0]);
    }
}
