//! Canned figure runs.
//!
//! Every recipe normalizes its family of spectra to the family's global
//! maximum, since the measured transmission is in arbitrary units.

use std::f64::consts::TAU;

use crate::dynamics::IntegratorConfig;
use crate::error::Result;
use crate::perturbation::match_visibility;
use crate::pulse::PulseParams;
use crate::spin::SpinSystem;

use super::{spectrum, Model, ScanGrid, Spectrum};

/// φ₂ settings of the phase family, degrees.
pub const FIG4_PHASES_DEG: [f64; 13] = [0.0, 30.0, 60.0, 90.0, 120.0, 150.0, 180.0, 210.0, 240.0, 270.0, 300.0, 330.0, 360.0];
pub const FIG5B_PHASES_DEG: [f64; 3] = [0.0, 115.0, 180.0];

/// A named spectrum within a recipe's output.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub spectrum: Spectrum,
}

/// Scales every spectrum by the inverse of the largest signal in the family.
/// A family that is identically zero is returned unchanged.
pub fn normalize_family(family: &mut [Series]) {
    let top = family.iter().map(|s| s.spectrum.max_signal()).fold(0.0, f64::max);
    if top > 0.0 {
        for s in family.iter_mut() {
            s.spectrum = s.spectrum.scaled(1.0 / top);
        }
    }
}

/// Strong-drive spectra from the three-level model, with the ν₂ channel on
/// as configured and switched off.
pub fn fig3a(
    p: &PulseParams,
    sys: &SpinSystem,
    grid: &ScanGrid,
    cfg: &IntegratorConfig,
    jobs: Option<usize>,
) -> Result<Vec<Series>> {
    let g = ScanGrid { model: Model::ThreeLevelDm, phase_values: Vec::new(), ..grid.clone() };
    let on = spectrum(&g, p, sys, cfg, jobs)?.remove(0);
    let off = spectrum(&g, &p.with_amplitudes(p.b1(), 0.0)?, sys, cfg, jobs)?.remove(0);
    let mut out = vec![
        Series { label: "b2_on".into(), spectrum: on },
        Series { label: "b2_off".into(), spectrum: off },
    ];
    normalize_family(&mut out);
    Ok(out)
}

fn phase_family(
    phases_deg: &[f64],
    p: &PulseParams,
    sys: &SpinSystem,
    grid: &ScanGrid,
    cfg: &IntegratorConfig,
    jobs: Option<usize>,
) -> Result<Vec<Series>> {
    let matched = match_visibility(p, p.nu2())?;
    let g = ScanGrid { phase_values: phases_deg.iter().map(|d| d.to_radians()).collect(), ..grid.clone() };
    let mut out: Vec<Series> = spectrum(&g, &matched, sys, cfg, jobs)?
        .into_iter()
        .zip(phases_deg)
        .map(|(s, d)| Series { label: format!("phi2_{d}"), spectrum: s })
        .collect();
    normalize_family(&mut out);
    Ok(out)
}

/// φ₂ = 0°, 30°, …, 360° with B₁ rescaled so both paths have equal weight at ν₂.
pub fn fig4(
    p: &PulseParams,
    sys: &SpinSystem,
    grid: &ScanGrid,
    cfg: &IntegratorConfig,
    jobs: Option<usize>,
) -> Result<Vec<Series>> {
    phase_family(&FIG4_PHASES_DEG, p, sys, grid, cfg, jobs)
}

/// φ₂ = 0°, 115°, 180°, visibility matched as in [`fig4`].
pub fn fig5b(
    p: &PulseParams,
    sys: &SpinSystem,
    grid: &ScanGrid,
    cfg: &IntegratorConfig,
    jobs: Option<usize>,
) -> Result<Vec<Series>> {
    phase_family(&FIG5B_PHASES_DEG, p, sys, grid, cfg, jobs)
}

/// Default scan band of the recipes, rad/s.
pub fn default_band() -> (f64, f64, usize) {
    (TAU * 100e3, TAU * 200e3, 201)
}
