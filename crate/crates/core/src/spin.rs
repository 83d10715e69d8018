//! The F = 1 ground-state manifold in a static longitudinal field.
//!
//! Basis ordering is fixed crate-wide as (m_F = +1, 0, −1): index 0 is
//! m_F = +1, index 2 is m_F = −1.

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::constants::AtomConstants;
use crate::error::{Error, Result};
use crate::pulse::{field_amplitude, PulseParams};

pub type CMatrix3 = Matrix3<Complex64>;

/// Index of m_F = +1.
pub const M_PLUS: usize = 0;
/// Index of m_F = 0.
pub const M_ZERO: usize = 1;
/// Index of m_F = −1.
pub const M_MINUS: usize = 2;

/// Tolerances on the density-matrix invariants.
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-8;

/// A 3×3 density matrix over (m_F = +1, 0, −1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(CMatrix3);

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(m: CMatrix3) -> Result<Self> {
        let rho = DensityMatrix(m);
        let h = rho.hermiticity_error();
        if !(h <= HERMITICITY_TOL) {
            return Err(Error::Domain(format!("density matrix not Hermitian (deviation {h:e})")));
        }
        let tr = rho.trace();
        if !((tr - 1.0).abs() <= TRACE_TOL) {
            return Err(Error::Domain(format!("density matrix trace {tr} != 1")));
        }
        let ev = rho.min_eigenvalue();
        if !(ev >= -POSITIVITY_TOL) {
            return Err(Error::Domain(format!("density matrix has eigenvalue {ev:e} < 0")));
        }
        Ok(rho)
    }

    /// Wraps a matrix without checking invariants (integrator output).
    pub fn from_matrix_unchecked(m: CMatrix3) -> Self {
        DensityMatrix(m)
    }

    /// Diagonal state with the given populations.
    pub fn diagonal(p_plus: f64, p_zero: f64, p_minus: f64) -> Result<Self> {
        let m = Matrix3::from_diagonal(&nalgebra::Vector3::new(
            Complex64::from(p_plus),
            Complex64::from(p_zero),
            Complex64::from(p_minus),
        ));
        Self::new(m)
    }

    /// Maximally mixed state diag(1/3, 1/3, 1/3).
    pub fn maximally_mixed() -> Self {
        let third = Complex64::from(1.0 / 3.0);
        DensityMatrix(Matrix3::from_diagonal_element(third))
    }

    pub fn matrix(&self) -> &CMatrix3 {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix3 {
        self.0
    }

    /// Population of basis state `i`.
    pub fn population(&self, i: usize) -> f64 {
        self.0[(i, i)].re
    }

    pub fn populations(&self) -> [f64; 3] {
        [self.population(0), self.population(1), self.population(2)]
    }

    /// Real part of the trace.
    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// Largest elementwise |ρ − ρ†|.
    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.0)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (self.0 + self.0.adjoint()) * Complex64::from(0.5);
        herm.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Population of the sub-levels the probe detects, m_F = 0 and −1,
    /// each weighted by its probe coupling.
    pub fn upper_population(&self, weights: ProbeWeights) -> f64 {
        weights.zero * self.population(M_ZERO) + weights.minus * self.population(M_MINUS)
    }
}

/// Largest elementwise |m − m†|.
pub fn hermiticity_error(m: &CMatrix3) -> f64 {
    let d = m - m.adjoint();
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Relative probe sensitivity to the m_F = 0 and m_F = −1 populations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeWeights {
    pub zero: f64,
    pub minus: f64,
}

impl Default for ProbeWeights {
    fn default() -> Self {
        Self { zero: 1.0, minus: 1.0 }
    }
}

/// Static field, atom constants, relaxation and equilibrium state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinSystem {
    b0: f64,
    constants: AtomConstants,
    gamma: f64,
    rho_eq: DensityMatrix,
}

impl SpinSystem {
    /// Default ρ₀ is the maximally mixed state.
    pub fn new(b0: f64, gamma: f64, constants: AtomConstants) -> Result<Self> {
        if !b0.is_finite() {
            return Err(Error::Domain("b0 must be finite".into()));
        }
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::Domain(format!("gamma must be non-negative, got {gamma}")));
        }
        Ok(Self {
            b0,
            constants,
            gamma,
            rho_eq: DensityMatrix::maximally_mixed(),
        })
    }

    /// System whose Zeeman splitting equals `omega` (rad/s).
    pub fn from_splitting(omega: f64, gamma: f64, constants: AtomConstants) -> Result<Self> {
        if !(omega >= 0.0) {
            return Err(Error::Domain(format!("splitting must be non-negative, got {omega}")));
        }
        let k = constants.splitting_per_tesla();
        if k == 0.0 {
            return Err(Error::Domain("zero Zeeman coupling".into()));
        }
        Self::new(omega / k, gamma, constants)
    }

    /// Same atom retuned to another splitting.
    pub fn with_splitting(&self, omega: f64) -> Result<Self> {
        let mut s = Self::from_splitting(omega, self.gamma, self.constants)?;
        s.rho_eq = self.rho_eq;
        Ok(s)
    }

    pub fn with_equilibrium(mut self, rho_eq: DensityMatrix) -> Self {
        self.rho_eq = rho_eq;
        self
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        let mut s = Self::new(self.b0, gamma, self.constants)?;
        s.rho_eq = self.rho_eq;
        Ok(s)
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }
    pub fn constants(&self) -> AtomConstants {
        self.constants
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn rho_eq(&self) -> &DensityMatrix {
        &self.rho_eq
    }
}

/// Zeeman splitting ω = |g|μ₀B₀/ħ between adjacent sub-levels, rad/s.
pub fn zeeman_splitting(sys: &SpinSystem) -> f64 {
    sys.constants.splitting_per_tesla() * sys.b0.abs()
}

/// Hamiltonian of the F = 1 manifold, in joules.
///
/// ```text
/// H = −gμ₀ [ B_z       B_x/√2    0      ]
///          [ B_x/√2    0         B_x/√2 ]
///          [ 0         B_x/√2    −B_z   ]
/// ```
/// with B_z = B₀ and B_x from the pulse (B_y = 0).
pub fn hamiltonian(t: f64, sys: &SpinSystem, p: &PulseParams) -> CMatrix3 {
    hamiltonian_from_fields(sys.b0, field_amplitude(t, p), sys.constants.lande_g * sys.constants.bohr_magneton)
}

/// Same matrix divided by ħ, in rad/s.
pub fn hamiltonian_over_hbar(t: f64, sys: &SpinSystem, p: &PulseParams) -> CMatrix3 {
    let c = sys.constants;
    hamiltonian_from_fields(sys.b0, field_amplitude(t, p), c.lande_g * c.bohr_magneton / c.hbar)
}

fn hamiltonian_from_fields(bz: f64, bx: f64, g_mu: f64) -> CMatrix3 {
    let d = -g_mu * bz;
    let o = Complex64::from(-g_mu * bx / std::f64::consts::SQRT_2);
    let z = Complex64::from(0.0);
    Matrix3::new(
        Complex64::from(d), o, z,
        o, z, o,
        z, o, Complex64::from(-d),
    )
}

/// Optically pumped state: all population in m_F = +1.
pub fn pumped_initial_state() -> DensityMatrix {
    let mut m = CMatrix3::zeros();
    m[(M_PLUS, M_PLUS)] = Complex64::from(1.0);
    DensityMatrix(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn pulse(b1: f64, b2: f64) -> PulseParams {
        PulseParams::new(TAU * 50e3, TAU * 150e3, 0.3, 1.1, b1, b2, 130e-6).unwrap()
    }

    #[test]
    fn diagonal_without_transverse_field() {
        let sys = SpinSystem::new(2e-6, 0.0, AtomConstants::default()).unwrap();
        let h = hamiltonian(0.0, &sys, &pulse(0.0, 0.0));
        let c = AtomConstants::default();
        let gmb = c.lande_g * c.bohr_magneton * 2e-6;
        assert_eq!(h[(0, 0)].re, -gmb);
        assert_eq!(h[(1, 1)].re, 0.0);
        assert_eq!(h[(2, 2)].re, gmb);
        let split = (h[(0, 0)].re - h[(1, 1)].re).abs();
        assert!((split - c.lande_g.abs() * c.bohr_magneton * 2e-6).abs() < 1e-40);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(h[(i, j)].norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn splitting_values() {
        let c = AtomConstants::default();
        assert_eq!(zeeman_splitting(&SpinSystem::new(0.0, 0.0, c).unwrap()), 0.0);
        let s = SpinSystem::from_splitting(TAU * 150e3, 0.0, c).unwrap();
        assert!((zeeman_splitting(&s) - TAU * 150e3).abs() < 1e-8);
        let d = SpinSystem::new(2.0 * s.b0(), 0.0, c).unwrap();
        assert!((zeeman_splitting(&d) - 2.0 * TAU * 150e3).abs() < 1e-7);
        // 150 kHz needs about 21.4 µT at |g| = 1/2
        assert!((s.b0() - 21.4e-6).abs() < 0.1e-6, "{}", s.b0());
    }

    #[test]
    fn splitting_ignores_sign_of_g() {
        let mut c = AtomConstants::default();
        let a = zeeman_splitting(&SpinSystem::new(3e-6, 0.0, c).unwrap());
        c.lande_g = -c.lande_g;
        let b = zeeman_splitting(&SpinSystem::new(3e-6, 0.0, c).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn pumped_state() {
        let rho = pumped_initial_state();
        assert_eq!(rho.trace(), 1.0);
        assert_eq!(rho.population(M_PLUS), 1.0);
        let m = rho.matrix();
        assert_eq!(m * m, *m);
        assert_eq!(rho.upper_population(ProbeWeights::default()), 0.0);
        assert!(DensityMatrix::new(*m).is_ok());
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::diagonal(0.5, 0.5, 0.0).is_ok());
        assert!(DensityMatrix::diagonal(0.5, 0.6, 0.0).is_err());
        assert!(DensityMatrix::diagonal(1.2, -0.2, 0.0).is_err());
        let mut m = *DensityMatrix::maximally_mixed().matrix();
        m[(0, 1)] = Complex64::new(0.0, 0.1);
        assert!(DensityMatrix::new(m).is_err());
        m[(1, 0)] = Complex64::new(0.0, -0.1);
        assert!(DensityMatrix::new(m).is_ok());
    }

    #[test]
    fn invalid_gamma() {
        assert!(SpinSystem::new(1e-6, -1.0, AtomConstants::default()).is_err());
    }

    proptest! {
        #[test]
        fn hermitian_traceless_and_coupling_structure(
            t in -5e-4f64..5e-4, b0 in -5e-5f64..5e-5,
            b1 in 0.0f64..1e-5, b2 in 0.0f64..1e-5
        ) {
            let sys = SpinSystem::new(b0, 0.0, AtomConstants::default()).unwrap();
            let h = hamiltonian(t, &sys, &pulse(b1, b2));
            prop_assert_eq!(hermiticity_error(&h), 0.0);
            prop_assert_eq!(h.trace().norm(), 0.0);
            prop_assert_eq!(h[(0, 2)].norm(), 0.0);
            prop_assert_eq!(h[(2, 0)].norm(), 0.0);
            prop_assert_eq!(h[(0, 1)], h[(1, 2)]);
        }
    }
}
