//! Sweeps over the Zeeman splitting and the carrier-envelope phases.

pub mod fit;
pub mod peaks;
pub mod recipes;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::dynamics::{evolve_density, evolve_two_level, AmplitudePair, IntegratorConfig};
use crate::error::{Error, Result};
use crate::perturbation::c_total;
use crate::pulse::PulseParams;
use crate::spin::{pumped_initial_state, ProbeWeights, SpinSystem};

pub use fit::{fit_period, fit_sinusoid, SinusoidFit};
pub use peaks::{find_peaks, Peak, DEFAULT_MIN_HEIGHT_FRAC, DEFAULT_SMOOTH_WINDOW};

/// Backend used to turn one (ω, pulse) pair into an excitation signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// |C⁽¹⁾ + C⁽³⁾|² from the closed forms.
    Perturbative,
    /// |C_a|² after integrating the two-level amplitude equations.
    TwoLevelOde,
    /// Upper-level population of the full three-level density matrix.
    ThreeLevelDm,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::Perturbative, Model::TwoLevelOde, Model::ThreeLevelDm];

    pub fn as_str(&self) -> &'static str {
        match self {
            Model::Perturbative => "perturbative",
            Model::TwoLevelOde => "two_level_ode",
            Model::ThreeLevelDm => "three_level_dm",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Model::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown model `{s}` (expected perturbative, two_level_ode or three_level_dm)")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid {
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_points: usize,
    /// φ₂ settings, rad. One spectrum is produced per entry.
    pub phase_values: Vec<f64>,
    pub model: Model,
    pub probe_weights: ProbeWeights,
}

impl ScanGrid {
    pub fn new(omega_min: f64, omega_max: f64, omega_points: usize, phase_values: Vec<f64>, model: Model) -> Result<Self> {
        let g = Self { omega_min, omega_max, omega_points, phase_values, model, probe_weights: ProbeWeights::default() };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.omega_min.is_finite() || !self.omega_max.is_finite() || !(self.omega_min < self.omega_max) {
            return Err(Error::Domain(format!(
                "omega band must satisfy min < max, got [{}, {}]",
                self.omega_min, self.omega_max
            )));
        }
        if self.omega_min <= 0.0 {
            return Err(Error::Domain("omega band must be positive".into()));
        }
        if self.omega_points < 2 {
            return Err(Error::Domain("omega_points must be at least 2".into()));
        }
        if self.phase_values.iter().any(|p| !p.is_finite()) {
            return Err(Error::Domain("phase values must be finite".into()));
        }
        Ok(())
    }

    pub fn omegas(&self) -> Vec<f64> {
        let n = self.omega_points;
        let h = (self.omega_max - self.omega_min) / (n - 1) as f64;
        (0..n)
            .map(|i| if i + 1 == n { self.omega_max } else { self.omega_min + i as f64 * h })
            .collect()
    }

    pub fn step(&self) -> f64 {
        (self.omega_max - self.omega_min) / (self.omega_points - 1) as f64
    }

    /// Same band with `2n − 1` points, so every old node is kept.
    pub fn refined(&self) -> Self {
        Self { omega_points: 2 * self.omega_points - 1, ..self.clone() }
    }
}

/// One grid point. `signal` is `None` when the backend failed there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub omega: f64,
    pub signal: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub samples: Vec<Sample>,
    /// Backend failures, by grid ω.
    pub gaps: Vec<(f64, Error)>,
    pub model: Model,
    /// Pulse the spectrum was computed with, phases included.
    pub pulse: PulseParams,
}

impl Spectrum {
    pub fn phi1(&self) -> f64 {
        self.pulse.phi1()
    }

    pub fn phi2(&self) -> f64 {
        self.pulse.phi2()
    }

    /// The (ω, signal) pairs that were computed successfully.
    pub fn valid(&self) -> Vec<(f64, f64)> {
        self.samples.iter().filter_map(|s| s.signal.map(|v| (s.omega, v))).collect()
    }

    pub fn max_signal(&self) -> f64 {
        self.samples.iter().filter_map(|s| s.signal).fold(0.0, f64::max)
    }

    pub fn scaled(&self, k: f64) -> Self {
        let mut out = self.clone();
        for s in &mut out.samples {
            s.signal = s.signal.map(|v| v * k);
        }
        out
    }
}

/// Linear map from upper-level population to the probe absorption signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionModel {
    scale: f64,
}

impl TransmissionModel {
    pub fn new(scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::Domain(format!("transmission scale must be positive, got {scale}")));
        }
        Ok(Self { scale })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

/// −ln(I₁/I₂) for an upper-level population `p_a`.
pub fn transmission_signal(p_a: f64, tm: TransmissionModel) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_a) {
        return Err(Error::Domain(format!("population must lie in [0, 1], got {p_a}")));
    }
    Ok(tm.scale * p_a)
}

/// Excitation signal at Zeeman splitting `omega`. The three-level backend
/// starts from the pumped state and reads the summed m = 0, −1 population.
pub fn excitation_signal(
    omega: f64,
    p: &PulseParams,
    sys: &SpinSystem,
    model: Model,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    excitation_signal_weighted(omega, p, sys, model, cfg, ProbeWeights::default())
}

pub fn excitation_signal_weighted(
    omega: f64,
    p: &PulseParams,
    sys: &SpinSystem,
    model: Model,
    cfg: &IntegratorConfig,
    weights: ProbeWeights,
) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::Domain(format!("splitting must be positive, got {omega}")));
    }
    match model {
        Model::Perturbative => Ok(c_total(omega, p)?.probability()),
        Model::TwoLevelOde => {
            let tr = evolve_two_level(omega, p, &cfg.endpoints_only(), &AmplitudePair::ground())?;
            Ok(tr.final_state().c_a.norm_sqr())
        }
        Model::ThreeLevelDm => {
            let s = sys.with_splitting(omega)?;
            let tr = evolve_density(&s, p, &cfg.endpoints_only(), &pumped_initial_state())?;
            // integration round-off can leave a tiny negative population
            Ok(tr.final_state().upper_population(weights).max(0.0))
        }
    }
}

/// Runs `f` on a pool of `jobs` threads, or on the global pool for `None`.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(Error::Domain("jobs must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn spectrum_at_phase(grid: &ScanGrid, omegas: &[f64], p: &PulseParams, sys: &SpinSystem, cfg: &IntegratorConfig) -> Spectrum {
    let results: Vec<Result<f64>> = omegas
        .par_iter()
        .map(|&w| excitation_signal_weighted(w, p, sys, grid.model, cfg, grid.probe_weights))
        .collect();
    let mut samples = Vec::with_capacity(omegas.len());
    let mut gaps = Vec::new();
    for (&omega, r) in omegas.iter().zip(results) {
        match r {
            Ok(v) => samples.push(Sample { omega, signal: Some(v) }),
            Err(e) => {
                samples.push(Sample { omega, signal: None });
                gaps.push((omega, e));
            }
        }
    }
    Spectrum { samples, gaps, model: grid.model, pulse: *p }
}

/// One spectrum per φ₂ in `grid.phase_values` (φ₁ taken from `p`). An empty
/// phase list means "use the pulse as given".
///
/// Grid points are evaluated in parallel but assembled in grid order, so the
/// output does not depend on the number of threads.
pub fn spectrum(
    grid: &ScanGrid,
    p: &PulseParams,
    sys: &SpinSystem,
    cfg: &IntegratorConfig,
    jobs: Option<usize>,
) -> Result<Vec<Spectrum>> {
    grid.validate()?;
    cfg.validate()?;
    let pulses: Vec<PulseParams> = if grid.phase_values.is_empty() {
        vec![*p]
    } else {
        grid.phase_values.iter().map(|&phi2| p.with_phases(p.phi1(), phi2)).collect::<Result<_>>()?
    };
    let omegas = grid.omegas();
    with_jobs(jobs, || pulses.iter().map(|q| spectrum_at_phase(grid, &omegas, q, sys, cfg)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseScan {
    pub omega: f64,
    pub model: Model,
    /// (φ₂, signal) in input order.
    pub points: Vec<(f64, f64)>,
    /// `A + B·cos(φ₂ − φ₀)` fit with period 2π; absent for fewer than 3 points.
    pub fit: Option<SinusoidFit>,
}

/// Signal against φ₂ at fixed splitting.
pub fn phase_scan(
    phis: &[f64],
    omega_fixed: f64,
    p: &PulseParams,
    sys: &SpinSystem,
    model: Model,
    cfg: &IntegratorConfig,
    jobs: Option<usize>,
) -> Result<PhaseScan> {
    cfg.validate()?;
    let pulses: Vec<PulseParams> = phis.iter().map(|&phi| p.with_phases(p.phi1(), phi)).collect::<Result<_>>()?;
    let values: Vec<f64> = with_jobs(jobs, || {
        pulses
            .par_iter()
            .map(|q| excitation_signal(omega_fixed, q, sys, model, cfg))
            .collect::<Result<Vec<_>>>()
    })??;
    let points: Vec<(f64, f64)> = phis.iter().copied().zip(values).collect();
    let fit = if points.len() >= 3 { Some(fit_sinusoid(&points, std::f64::consts::TAU)?) } else { None };
    Ok(PhaseScan { omega: omega_fixed, model, points, fit })
}
