//! Time evolution of the driven atom.
//!
//! Two models share one adaptive integrator:
//! - the lab-frame density matrix of the full F = 1 manifold with scalar
//!   relaxation, `ρ̇ = −(i/ħ)[H, ρ] − Γ(ρ − ρ₀)`;
//! - the interaction-picture two-level amplitudes
//!   `Ċ_a = iΩ(t)e^{iωt}C_b`, `Ċ_b = iΩ*(t)e^{−iωt}C_a`.
//!
//! Neither model makes a rotating-wave approximation.

pub mod integrator;

use nalgebra::Vector2;
use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::pulse::{rabi_frequency, PulseParams};
use crate::spin::{
    hamiltonian_over_hbar, hermiticity_error, zeeman_splitting, CMatrix3, DensityMatrix, SpinSystem,
    HERMITICITY_TOL, POSITIVITY_TOL, TRACE_TOL,
};
use integrator::{dopri5, AdaptiveOptions};

/// Points per period of the fastest oscillation the step size must resolve.
pub const STEPS_PER_PERIOD: f64 = 20.0;

/// Tolerance on |C_a|² + |C_b|² − 1 accepted for an initial amplitude pair.
pub const NORM_TOL: f64 = 1e-9;

/// Two-level probability amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudePair {
    pub c_a: Complex64,
    pub c_b: Complex64,
}

impl AmplitudePair {
    /// All population in the lower level b.
    pub fn ground() -> Self {
        Self { c_a: Complex64::from(0.0), c_b: Complex64::from(1.0) }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c_a.norm_sqr() + self.c_b.norm_sqr()
    }

    fn to_vector(self) -> Vector2<Complex64> {
        Vector2::new(self.c_a, self.c_b)
    }

    fn from_vector(v: &Vector2<Complex64>) -> Self {
        Self { c_a: v[0], c_b: v[1] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the step size, s. The step is further capped so that the
    /// fastest carrier or Larmor period gets at least 20 steps.
    pub max_step: f64,
    /// Integration window is `[−m·T, +m·T]` with T the pulse FWHM.
    pub t_cut_multiple: f64,
    /// Output samples on the trajectory grid, endpoints included.
    pub samples: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            t_cut_multiple: 4.0,
            samples: 2048,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::Domain("integrator tolerances must be positive".into()));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::Domain("max_step must be positive".into()));
        }
        if !(self.t_cut_multiple > 0.0) || !self.t_cut_multiple.is_finite() {
            return Err(Error::Domain("t_cut_multiple must be positive".into()));
        }
        if self.samples < 2 {
            return Err(Error::Domain("samples must be at least 2".into()));
        }
        Ok(())
    }

    /// Same tolerances, but only the two endpoints are sampled.
    pub fn endpoints_only(&self) -> Self {
        Self { samples: 2, ..*self }
    }

    fn adaptive(&self, fastest: f64) -> AdaptiveOptions {
        let resolve = if fastest > 0.0 { TAU / (STEPS_PER_PERIOD * fastest) } else { f64::INFINITY };
        AdaptiveOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step.min(resolve),
            samples: self.samples,
            ..AdaptiveOptions::default()
        }
    }
}

/// Sampled solution of one evolution.
#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl<S> Trajectory<S> {
    pub fn final_state(&self) -> &S {
        self.states.last().expect("trajectories hold at least two samples")
    }
}

/// `−i[H/ħ, ρ] − Γ(ρ − ρ₀)` in s⁻¹.
pub fn liouville_rhs(rho: &CMatrix3, t: f64, sys: &SpinSystem, p: &PulseParams) -> CMatrix3 {
    let h = hamiltonian_over_hbar(t, sys, p);
    let comm = h * rho - rho * h;
    let mut out = comm * Complex64::new(0.0, -1.0);
    if sys.gamma() != 0.0 {
        out -= (rho - sys.rho_eq().matrix()) * Complex64::from(sys.gamma());
    }
    out
}

/// Integrates the density matrix across `[−t_cut, +t_cut]`.
pub fn evolve_density(
    sys: &SpinSystem,
    p: &PulseParams,
    cfg: &IntegratorConfig,
    rho_init: &DensityMatrix,
) -> Result<Trajectory<DensityMatrix>> {
    let t_cut = p.t_cut(cfg.t_cut_multiple);
    evolve_density_between(sys, p, cfg, rho_init, -t_cut, t_cut)
}

/// Integrates the density matrix from `t0` to `t1`, which may run backwards.
///
/// Hermiticity, trace and positivity of the final state are checked but not
/// re-imposed.
pub fn evolve_density_between(
    sys: &SpinSystem,
    p: &PulseParams,
    cfg: &IntegratorConfig,
    rho_init: &DensityMatrix,
    t0: f64,
    t1: f64,
) -> Result<Trajectory<DensityMatrix>> {
    cfg.validate()?;
    let fastest = p.max_carrier().max(zeeman_splitting(sys));
    let opts = cfg.adaptive(fastest);
    let sol = dopri5(|t, rho: &CMatrix3| liouville_rhs(rho, t, sys, p), t0, t1, *rho_init.matrix(), &opts)?;

    let last = sol.states.last().expect("non-empty");
    let herm = hermiticity_error(last);
    // trace is conserved only if tr ρ₀ = tr ρ(t0) or Γ = 0
    let tr = last.trace().re;
    let expected_tr = if sys.gamma() == 0.0 {
        rho_init.trace()
    } else {
        let decay = (-sys.gamma() * (t1 - t0).abs()).exp();
        rho_init.trace() * decay + sys.rho_eq().trace() * (1.0 - decay)
    };
    if herm > HERMITICITY_TOL || (tr - expected_tr).abs() > TRACE_TOL {
        return Err(Error::Integration {
            t: t1,
            reason: format!("density matrix invariants violated (hermiticity {herm:e}, trace {tr})"),
        });
    }
    // Runge–Kutta steps keep ρ Hermitian and its trace exact, but not its
    // positivity: a pure state drifts below zero by roughly the global error.
    let pos_tol = POSITIVITY_TOL.max(1e4 * cfg.rel_tol);
    let min_ev = DensityMatrix::from_matrix_unchecked(*last).min_eigenvalue();
    if min_ev < -pos_tol {
        return Err(Error::Integration { t: t1, reason: format!("negative eigenvalue {min_ev:e}") });
    }

    Ok(Trajectory {
        times: sol.times,
        states: sol.states.into_iter().map(DensityMatrix::from_matrix_unchecked).collect(),
        accepted_steps: sol.accepted,
        rejected_steps: sol.rejected,
    })
}

/// Right-hand side of the two-level amplitude equations.
#[inline]
fn two_level_rhs(c: &Vector2<Complex64>, t: f64, omega: f64, p: &PulseParams) -> Vector2<Complex64> {
    let rabi = Complex64::from(rabi_frequency(t, p));
    let phase = Complex64::from_polar(1.0, omega * t);
    let i = Complex64::i();
    Vector2::new(i * rabi * phase * c[1], i * rabi.conj() * phase.conj() * c[0])
}

/// Integrates the two-level amplitudes across `[−t_cut, +t_cut]`.
pub fn evolve_two_level(
    omega: f64,
    p: &PulseParams,
    cfg: &IntegratorConfig,
    init: &AmplitudePair,
) -> Result<Trajectory<AmplitudePair>> {
    let t_cut = p.t_cut(cfg.t_cut_multiple);
    evolve_two_level_between(omega, p, cfg, init, -t_cut, t_cut)
}

/// Integrates the two-level amplitudes from `t0` to `t1`.
pub fn evolve_two_level_between(
    omega: f64,
    p: &PulseParams,
    cfg: &IntegratorConfig,
    init: &AmplitudePair,
    t0: f64,
    t1: f64,
) -> Result<Trajectory<AmplitudePair>> {
    cfg.validate()?;
    let n = init.norm_sqr();
    if !((n - 1.0).abs() <= NORM_TOL) {
        return Err(Error::Domain(format!("initial amplitudes not normalized: |C_a|²+|C_b|² = {n}")));
    }
    let fastest = p.max_carrier().max(omega.abs());
    let opts = cfg.adaptive(fastest);
    let sol = dopri5(|t, c: &Vector2<Complex64>| two_level_rhs(c, t, omega, p), t0, t1, init.to_vector(), &opts)?;
    Ok(Trajectory {
        times: sol.times,
        states: sol.states.iter().map(AmplitudePair::from_vector).collect(),
        accepted_steps: sol.accepted,
        rejected_steps: sol.rejected,
    })
}
