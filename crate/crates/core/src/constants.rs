//! Physical constants shared by the pulse and spin-system models.

use serde::{Deserialize, Serialize};

/// Reduced Planck constant (CODATA 2018), J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Bohr magneton (CODATA 2018), J/T.
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;

/// Landé factor of the 5²S₁/₂, F = 1 ground state of ⁸⁷Rb.
pub const LANDE_G_RB87_F1: f64 = -0.5;

/// The triple (g, μ₀, ħ) that converts magnetic fields into angular frequencies.
///
/// Pulses and spin systems both carry a copy; the two must agree for the
/// three-level and two-level models to describe the same atom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomConstants {
    pub lande_g: f64,
    pub bohr_magneton: f64,
    pub hbar: f64,
}

impl Default for AtomConstants {
    fn default() -> Self {
        Self {
            lande_g: LANDE_G_RB87_F1,
            bohr_magneton: BOHR_MAGNETON,
            hbar: HBAR,
        }
    }
}

impl AtomConstants {
    /// Natural units: ħ = μ₀ = 1, so fields are measured in rad/s.
    pub fn natural(lande_g: f64) -> Self {
        Self {
            lande_g,
            bohr_magneton: 1.0,
            hbar: 1.0,
        }
    }

    /// gμ₀/(2√2 ħ): signed Rabi frequency per tesla of transverse field.
    pub fn rabi_per_tesla(&self) -> f64 {
        self.lande_g * self.bohr_magneton / (2.0 * std::f64::consts::SQRT_2 * self.hbar)
    }

    /// |g|μ₀/ħ: Zeeman splitting per tesla of longitudinal field.
    pub fn splitting_per_tesla(&self) -> f64 {
        self.lande_g.abs() * self.bohr_magneton / self.hbar
    }
}
