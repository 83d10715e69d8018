//! The linearly polarized bichromatic rf pulse under a Gaussian envelope.
//!
//! ```text
//! B_x(t) = exp(-α²t²) [B₁ cos(ν₁t + φ₁) + B₂ cos(ν₂t + φ₂)],   α = 2√(ln 2)/T
//! Ω(t)   = 2 exp(-α²t²) [Ω₁ cos(ν₁t + φ₁) + Ω₂ cos(ν₂t + φ₂)], Ωᵢ = gμ₀Bᵢ/(2√2 ħ)
//! ```
//!
//! All frequencies are angular (rad/s), phases in radians, fields in tesla.

use crate::constants::AtomConstants;
use crate::error::{Error, Result};

/// Envelope decay rate for a given intensity-independent field FWHM.
pub fn alpha_from_fwhm(fwhm: f64) -> Result<f64> {
    if !(fwhm > 0.0) || !fwhm.is_finite() {
        return Err(Error::Domain(format!("fwhm must be positive and finite, got {fwhm}")));
    }
    Ok(2.0 * std::f64::consts::LN_2.sqrt() / fwhm)
}

/// `exp(-α²t²)`, shared by the field and the Rabi frequency.
#[inline]
pub fn envelope(t: f64, alpha: f64) -> f64 {
    let x = alpha * t;
    (-x * x).exp()
}

/// Parameters of one bichromatic pulse.
///
/// Rabi amplitudes are derived from the field amplitudes once, at
/// construction, and carry the sign of the Landé factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseParams {
    nu1: f64,
    nu2: f64,
    phi1: f64,
    phi2: f64,
    // phases reduced to [0, 2π), so that φ and φ + 2π drive identical fields
    carrier_phase1: f64,
    carrier_phase2: f64,
    b1: f64,
    b2: f64,
    fwhm: f64,
    alpha: f64,
    constants: AtomConstants,
    rabi1: f64,
    rabi2: f64,
}

impl PulseParams {
    /// Builds a pulse using the default (⁸⁷Rb, SI) constants.
    pub fn new(nu1: f64, nu2: f64, phi1: f64, phi2: f64, b1: f64, b2: f64, fwhm: f64) -> Result<Self> {
        Self::with_constants(nu1, nu2, phi1, phi2, b1, b2, fwhm, AtomConstants::default())
    }

    #[allow(clippy::too_many_arguments)]
    pub fn with_constants(
        nu1: f64,
        nu2: f64,
        phi1: f64,
        phi2: f64,
        b1: f64,
        b2: f64,
        fwhm: f64,
        constants: AtomConstants,
    ) -> Result<Self> {
        if !(nu1 > 0.0) || !nu1.is_finite() {
            return Err(Error::Domain(format!("nu1 must be positive, got {nu1}")));
        }
        if !(nu2 > 0.0) || !nu2.is_finite() {
            return Err(Error::Domain(format!("nu2 must be positive, got {nu2}")));
        }
        if !(b1 >= 0.0) || !b1.is_finite() {
            return Err(Error::Domain(format!("b1 must be non-negative, got {b1}")));
        }
        if !(b2 >= 0.0) || !b2.is_finite() {
            return Err(Error::Domain(format!("b2 must be non-negative, got {b2}")));
        }
        if !phi1.is_finite() || !phi2.is_finite() {
            return Err(Error::Domain("phases must be finite".into()));
        }
        let alpha = alpha_from_fwhm(fwhm)?;
        let k = constants.rabi_per_tesla();
        Ok(Self {
            nu1,
            nu2,
            phi1,
            phi2,
            carrier_phase1: phi1.rem_euclid(std::f64::consts::TAU),
            carrier_phase2: phi2.rem_euclid(std::f64::consts::TAU),
            b1,
            b2,
            fwhm,
            alpha,
            constants,
            rabi1: k * b1,
            rabi2: k * b2,
        })
    }

    /// Carriers 2π·50 kHz and 2π·150 kHz, T = 130 µs, zero phases,
    /// with the given Rabi amplitude magnitudes.
    pub fn reference_pulse(rabi1_abs: f64, rabi2_abs: f64) -> Self {
        use std::f64::consts::TAU;
        Self::new(TAU * 50e3, TAU * 150e3, 0.0, 0.0, 0.0, 0.0, 130e-6)
            .and_then(|p| p.with_rabi_magnitudes(rabi1_abs, rabi2_abs))
            .expect("reference pulse is valid")
    }

    /// Same pulse with field amplitudes chosen so that |Ω₁|, |Ω₂| take the given values.
    pub fn with_rabi_magnitudes(&self, rabi1_abs: f64, rabi2_abs: f64) -> Result<Self> {
        let k = self.constants.rabi_per_tesla().abs();
        if k == 0.0 {
            return Err(Error::Domain("zero Rabi coupling constant".into()));
        }
        self.with_amplitudes(rabi1_abs.abs() / k, rabi2_abs.abs() / k)
    }

    pub fn with_amplitudes(&self, b1: f64, b2: f64) -> Result<Self> {
        Self::with_constants(self.nu1, self.nu2, self.phi1, self.phi2, b1, b2, self.fwhm, self.constants)
    }

    pub fn with_phases(&self, phi1: f64, phi2: f64) -> Result<Self> {
        Self::with_constants(self.nu1, self.nu2, phi1, phi2, self.b1, self.b2, self.fwhm, self.constants)
    }

    pub fn with_carriers(&self, nu1: f64, nu2: f64) -> Result<Self> {
        Self::with_constants(nu1, nu2, self.phi1, self.phi2, self.b1, self.b2, self.fwhm, self.constants)
    }

    pub fn with_fwhm(&self, fwhm: f64) -> Result<Self> {
        Self::with_constants(self.nu1, self.nu2, self.phi1, self.phi2, self.b1, self.b2, fwhm, self.constants)
    }

    pub fn nu1(&self) -> f64 {
        self.nu1
    }
    pub fn nu2(&self) -> f64 {
        self.nu2
    }
    pub fn phi1(&self) -> f64 {
        self.phi1
    }
    pub fn phi2(&self) -> f64 {
        self.phi2
    }
    pub fn b1(&self) -> f64 {
        self.b1
    }
    pub fn b2(&self) -> f64 {
        self.b2
    }
    pub fn fwhm(&self) -> f64 {
        self.fwhm
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn constants(&self) -> AtomConstants {
        self.constants
    }
    /// Signed Ω₁, rad/s.
    pub fn rabi1(&self) -> f64 {
        self.rabi1
    }
    /// Signed Ω₂, rad/s.
    pub fn rabi2(&self) -> f64 {
        self.rabi2
    }

    /// Largest carrier frequency.
    pub fn max_carrier(&self) -> f64 {
        self.nu1.max(self.nu2)
    }

    /// Upper bound of |Ω(t)| over all t.
    pub fn max_rabi(&self) -> f64 {
        2.0 * (self.rabi1.abs() + self.rabi2.abs())
    }

    /// Half-width of the truncated integration window.
    pub fn t_cut(&self, multiple: f64) -> f64 {
        multiple * self.fwhm
    }

    #[inline]
    fn carriers(&self, t: f64, a1: f64, a2: f64) -> f64 {
        a1 * (self.nu1 * t + self.carrier_phase1).cos() + a2 * (self.nu2 * t + self.carrier_phase2).cos()
    }
}

/// Transverse field B_x(t) in tesla; B_y is identically zero.
#[inline]
pub fn field_amplitude(t: f64, p: &PulseParams) -> f64 {
    envelope(t, p.alpha) * p.carriers(t, p.b1, p.b2)
}

/// Bichromatic Rabi frequency Ω(t) in rad/s.
#[inline]
pub fn rabi_frequency(t: f64, p: &PulseParams) -> f64 {
    2.0 * envelope(t, p.alpha) * p.carriers(t, p.rabi1, p.rabi2)
}
