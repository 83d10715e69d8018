//! Perturbative one- and three-photon excitation amplitudes.
//!
//! Closed forms (rotating-wave reduced) for the amplitude left in the upper
//! level after the pulse, starting from the lower level:
//!
//! ```text
//! C⁽¹⁾ =  i (√π/α) Ω₂ exp(−[(ω−ν₂)/2α]²) e^{−iφ₂}
//! C⁽³⁾ = −i √π / (2√3 α ν₁ (ω−ν₁)) Ω₁³ exp(−(ω−3ν₁)²/12α²) e^{−3iφ₁}
//! ```
//!
//! and brute-force quadratures of the first- and third-order Dyson
//! integrals that keep every carrier and counter-rotating term.

pub mod quadrature;

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::pulse::{rabi_frequency, PulseParams};
use quadrature::{cumulative_cubic, integrate_adaptive};

/// Default half-width of the guard band around the ν₁ pole, as a fraction of ν₁.
pub const DEFAULT_POLE_GUARD: f64 = 1e-6;

/// Minimum grid density accepted by the nested-integral oracle.
pub const MIN_POINTS_PER_PERIOD: f64 = 40.0;

/// One- and three-photon amplitudes and their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathAmplitudes {
    pub c1: Complex64,
    pub c3: Complex64,
    pub total: Complex64,
}

impl PathAmplitudes {
    /// |C_a(∞)|², the transferred population.
    pub fn probability(&self) -> f64 {
        self.total.norm_sqr()
    }
}

/// One-photon amplitude driven by the ν₂ carrier.
pub fn c1_closed(omega: f64, p: &PulseParams) -> Complex64 {
    let a = p.alpha();
    let x = (omega - p.nu2()) / (2.0 * a);
    let mag = PI.sqrt() / a * p.rabi2() * (-x * x).exp();
    Complex64::i() * mag * Complex64::from_polar(1.0, -p.phi2())
}

/// Three-photon amplitude driven by the ν₁ carrier.
///
/// Fails inside `|ω − ν₁| < 10⁻⁶ ν₁`, where the closed form has a pole.
pub fn c3_closed(omega: f64, p: &PulseParams) -> Result<Complex64> {
    c3_closed_with_guard(omega, p, DEFAULT_POLE_GUARD)
}

/// [`c3_closed`] with a custom guard band (fraction of ν₁).
pub fn c3_closed_with_guard(omega: f64, p: &PulseParams, guard: f64) -> Result<Complex64> {
    let a = p.alpha();
    let nu1 = p.nu1();
    let detuning = omega - nu1;
    let band = guard * nu1;
    if detuning.abs() < band || detuning == 0.0 {
        return Err(Error::Singularity { omega, nu1, guard: band });
    }
    let x = omega - 3.0 * nu1;
    let pref = PI.sqrt() / (2.0 * 3f64.sqrt() * a * nu1 * detuning);
    let mag = pref * p.rabi1().powi(3) * (-x * x / (12.0 * a * a)).exp();
    Ok(-Complex64::i() * mag * Complex64::from_polar(1.0, -3.0 * p.phi1()))
}

/// Both paths and their coherent sum.
pub fn c_total(omega: f64, p: &PulseParams) -> Result<PathAmplitudes> {
    let c1 = c1_closed(omega, p);
    let c3 = c3_closed(omega, p)?;
    Ok(PathAmplitudes { c1, c3, total: c1 + c3 })
}

/// Rescales B₁ so that |C⁽³⁾(ω)| = |C⁽¹⁾(ω)|, maximising the interference
/// contrast at `omega`.
pub fn match_visibility(p: &PulseParams, omega: f64) -> Result<PulseParams> {
    let c1 = c1_closed(omega, p).norm();
    let unit = p.with_rabi_magnitudes(1.0, p.rabi2().abs())?;
    let per_cube = c3_closed(omega, &unit)?.norm();
    if per_cube == 0.0 {
        return Err(Error::Domain("three-photon path vanishes at this splitting".into()));
    }
    let rabi1 = (c1 / per_cube).cbrt();
    p.with_rabi_magnitudes(rabi1, p.rabi2().abs())
}

/// Settings for the quadrature oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Window is `[−m·T, m·T]`.
    pub t_cut_multiple: f64,
    /// Absolute error target for the one-photon integral, relative to √π|Ω₂|/α.
    pub rel_target: f64,
    /// Grid samples per period of the fastest phase `ω + max(ν₁, ν₂)`.
    pub points_per_period: f64,
    /// Refuse grids longer than this.
    pub max_grid_points: usize,
    pub max_segments: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            t_cut_multiple: 4.0,
            rel_target: 1e-10,
            points_per_period: 64.0,
            max_grid_points: 50_000_000,
            max_segments: 2_000_000,
        }
    }
}

/// `i∫Ω(t)e^{iωt}dt` by adaptive Gauss–Kronrod over the truncated window.
pub fn c1_quadrature(omega: f64, p: &PulseParams) -> Result<Complex64> {
    c1_quadrature_with(omega, p, &QuadratureOptions::default())
}

pub fn c1_quadrature_with(omega: f64, p: &PulseParams, opts: &QuadratureOptions) -> Result<Complex64> {
    let scale = PI.sqrt() / p.alpha();
    let mut reference = scale * p.rabi2().abs();
    if reference == 0.0 {
        reference = scale * p.rabi1().abs();
    }
    if reference == 0.0 {
        return Ok(Complex64::from(0.0));
    }
    let t_cut = p.t_cut(opts.t_cut_multiple);
    let fastest = omega.abs() + p.max_carrier();
    let pieces = ((2.0 * t_cut * fastest / TAU).ceil() as usize).clamp(1, opts.max_segments / 2);
    let integral = integrate_adaptive(
        |t| Complex64::from_polar(rabi_frequency(t, p), omega * t),
        -t_cut,
        t_cut,
        opts.rel_target * reference,
        pieces,
        opts.max_segments,
    )?;
    Ok(Complex64::i() * integral)
}

/// Third-order Dyson term
/// `−i∫dt Ω(t)e^{iωt} ∫^t dt″ Ω*(t″)e^{−iωt″} ∫^{t″} dt′ Ω(t′)e^{iωt′}`.
///
/// The inner integrals are tabulated once on a uniform grid with a
/// 4th-order cumulative rule and the outer integral runs over the table.
pub fn c3_quadrature(omega: f64, p: &PulseParams) -> Result<Complex64> {
    c3_quadrature_with(omega, p, &QuadratureOptions::default())
}

pub fn c3_quadrature_with(omega: f64, p: &PulseParams, opts: &QuadratureOptions) -> Result<Complex64> {
    if !(opts.points_per_period >= MIN_POINTS_PER_PERIOD) {
        return Err(Error::Domain(format!(
            "points_per_period = {} is below the minimum of {MIN_POINTS_PER_PERIOD}",
            opts.points_per_period
        )));
    }
    let t_cut = p.t_cut(opts.t_cut_multiple);
    let fastest = omega.abs() + p.max_carrier();
    let h_max = TAU / (fastest * opts.points_per_period);
    let cells = (2.0 * t_cut / h_max).ceil();
    let required = if cells.is_finite() { cells as usize + 1 } else { usize::MAX };
    if required > opts.max_grid_points {
        return Err(Error::GridTooLarge { required, limit: opts.max_grid_points });
    }
    let n = required.max(4);
    let h = 2.0 * t_cut / (n - 1) as f64;

    let forward: Vec<Complex64> = (0..n)
        .map(|k| {
            let t = -t_cut + k as f64 * h;
            Complex64::from_polar(rabi_frequency(t, p), omega * t)
        })
        .collect();
    // Ω is real, so Ω*(t)e^{−iωt} is the conjugate of the forward factor
    let inner = cumulative_cubic(&forward, h);
    let middle_integrand: Vec<Complex64> = forward.iter().zip(&inner).map(|(u, i1)| u.conj() * i1).collect();
    let middle = cumulative_cubic(&middle_integrand, h);
    let outer_integrand: Vec<Complex64> = forward.iter().zip(&middle).map(|(u, i2)| u * i2).collect();
    let outer = cumulative_cubic(&outer_integrand, h);
    Ok(-Complex64::i() * outer[n - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reference(r1: f64, r2: f64) -> PulseParams {
        PulseParams::reference_pulse(r1, r2)
    }

    #[test]
    fn c1_line_centre_and_width() {
        let p = reference(0.0, 1e3);
        let a = p.alpha();
        let peak = c1_closed(p.nu2(), &p);
        assert!((peak.norm() - PI.sqrt() * 1e3 / a).abs() < 1e-12 * peak.norm());
        let off = c1_closed(p.nu2() + 2.0 * a, &p);
        assert!((off.norm() / peak.norm() - (-1.0f64).exp()).abs() < 1e-14);
        assert_eq!(c1_closed(p.nu2(), &reference(1e3, 0.0)).norm(), 0.0);
    }

    #[test]
    fn c1_phase_is_quarter_turn_minus_phi2() {
        let p = reference(0.0, 1e3).with_phases(0.0, 0.4).unwrap();
        let c = c1_closed(p.nu2(), &p);
        // Ω₂ < 0 for g < 0 adds π
        let expected = PI / 2.0 - 0.4 + if p.rabi2() < 0.0 { PI } else { 0.0 };
        let d = (c.arg() - expected).rem_euclid(TAU);
        assert!(d < 1e-12 || TAU - d < 1e-12);
    }

    #[test]
    fn c3_at_three_photon_resonance() {
        let p = reference(2e4, 0.0);
        let a = p.alpha();
        let nu1 = p.nu1();
        let c = c3_closed(3.0 * nu1, &p).unwrap();
        let want = PI.sqrt() * 2e4f64.powi(3) / (4.0 * 3f64.sqrt() * a * nu1 * nu1);
        assert!((c.norm() - want).abs() < 1e-12 * want);
        assert_eq!(c3_closed(3.0 * nu1, &reference(0.0, 1e3)).unwrap().norm(), 0.0);
    }

    #[test]
    fn c3_pole_guard() {
        let p = reference(2e4, 0.0);
        assert!(matches!(c3_closed(p.nu1(), &p), Err(Error::Singularity { .. })));
        assert!(matches!(c3_closed(p.nu1() * (1.0 + 5e-7), &p), Err(Error::Singularity { .. })));
        assert!(c3_closed(p.nu1() * (1.0 + 2e-6), &p).is_ok());
        assert!(c3_closed_with_guard(p.nu1() * (1.0 + 2e-6), &p, 1e-5).is_err());
    }

    #[test]
    fn paths_interfere_destructively_at_zero_phase() {
        let p = reference(3e4, 1e3);
        let w = p.nu2();
        let amps = c_total(w, &p).unwrap();
        let d = (amps.c1.norm() - amps.c3.norm()).abs();
        assert!((amps.total.norm() - d).abs() < 1e-14 * amps.c1.norm());
        let q = p.with_phases(0.0, PI).unwrap();
        let amps = c_total(w, &q).unwrap();
        let s = amps.c1.norm() + amps.c3.norm();
        assert!((amps.total.norm() - s).abs() < 1e-14 * s);
    }

    #[test]
    fn total_periodic_in_phi1_over_third_turn() {
        let p = reference(3e4, 1e3).with_phases(0.3, 1.2).unwrap();
        let q = p.with_phases(0.3 + TAU / 3.0, 1.2).unwrap();
        for k in 0..20 {
            let w = TAU * (140e3 + k as f64 * 1e3);
            let a = c_total(w, &p).unwrap().total.norm();
            let b = c_total(w, &q).unwrap().total.norm();
            assert!((a - b).abs() <= 1e-12, "{a} {b}");
        }
    }

    #[test]
    fn visibility_matching() {
        let p = reference(0.0, 1e3);
        let m = match_visibility(&p, p.nu2()).unwrap();
        let amps = c_total(p.nu2(), &m).unwrap();
        assert!((amps.c1.norm() - amps.c3.norm()).abs() < 1e-12 * amps.c1.norm());
        assert_eq!(m.rabi2(), p.rabi2());
    }

    #[test]
    fn c1_quadrature_against_closed_form() {
        let p = reference(4e3, 3e3).with_phases(0.4, -1.3).unwrap();
        let q = c1_quadrature(p.nu2(), &p).unwrap();
        let c = c1_closed(p.nu2(), &p);
        assert!((q - c).norm() / c.norm() < 1e-6, "{}", (q - c).norm() / c.norm());
    }

    #[test]
    fn c1_quadrature_pure_gaussian() {
        // carriers pushed to (almost) zero frequency
        let p = PulseParams::new(1e-6, 1e-6, 0.0, 0.0, 0.0, 0.0, 130e-6)
            .unwrap()
            .with_rabi_magnitudes(2e3, 1e3)
            .unwrap();
        let a = p.alpha();
        for &w in &[0.0, 1e4, 3e4] {
            let q = c1_quadrature(w, &p).unwrap();
            let exact = Complex64::i() * (PI.sqrt() / a) * (-w * w / (4.0 * a * a)).exp() * 2.0 * (p.rabi1() + p.rabi2());
            assert!((q - exact).norm() < 1e-9 * exact.norm().max(1e-3), "{w}: {q} vs {exact}");
        }
    }

    #[test]
    fn quadratures_vanish_without_drive() {
        let p = reference(0.0, 0.0);
        assert_eq!(c1_quadrature(p.nu2(), &p).unwrap().norm(), 0.0);
        assert_eq!(c3_quadrature(p.nu2(), &p).unwrap().norm(), 0.0);
    }

    #[test]
    fn c3_quadrature_is_cubic() {
        let p = reference(2e4, 1e4).with_phases(0.2, 0.9).unwrap();
        let w = TAU * 149e3;
        let opts = QuadratureOptions { points_per_period: 40.0, ..Default::default() };
        let base = c3_quadrature_with(w, &p, &opts).unwrap();
        let s = 1.7;
        let q = p.with_rabi_magnitudes(2e4 * s, 1e4 * s).unwrap();
        let scaled = c3_quadrature_with(w, &q, &opts).unwrap();
        assert!((scaled - base * s.powi(3)).norm() < 1e-10 * scaled.norm());
    }

    #[test]
    fn c3_quadrature_grid_guards() {
        let p = reference(2e4, 0.0);
        let coarse = QuadratureOptions { points_per_period: 10.0, ..Default::default() };
        assert!(matches!(c3_quadrature_with(p.nu2(), &p, &coarse), Err(Error::Domain(_))));
        let tiny = QuadratureOptions { max_grid_points: 1000, ..Default::default() };
        match c3_quadrature_with(p.nu2(), &p, &tiny) {
            Err(Error::GridTooLarge { required, .. }) => assert!(required > 1000),
            other => panic!("{other:?}"),
        }
    }

    proptest! {
        #[test]
        fn phase_covariance(phi in -7.0f64..7.0, delta in -7.0f64..7.0, dw in -2e4f64..2e4) {
            let p = reference(3e4, 1e3).with_phases(phi, phi).unwrap();
            let w = p.nu2() + dw;
            let c1 = c1_closed(w, &p);
            let c3 = c3_closed(w, &p).unwrap();
            let p1 = p.with_phases(phi, phi + delta).unwrap();
            let p3 = p.with_phases(phi + delta, phi).unwrap();
            let e1 = c1 * Complex64::from_polar(1.0, -delta);
            let e3 = c3 * Complex64::from_polar(1.0, -3.0 * delta);
            prop_assert!((c1_closed(w, &p1) - e1).norm() <= 1e-12 * c1.norm().max(1e-300));
            prop_assert!((c3_closed(w, &p3).unwrap() - e3).norm() <= 1e-12 * c3.norm().max(1e-300));
        }

        #[test]
        fn depends_on_phase_combination_only(phi1 in -4.0f64..4.0, phi2 in -4.0f64..4.0, shift in -4.0f64..4.0) {
            // (φ₁, φ₂) → (φ₁ + s, φ₂ + 3s) leaves 3φ₁ − φ₂ unchanged
            let p = reference(3e4, 1e3).with_phases(phi1, phi2).unwrap();
            let q = p.with_phases(phi1 + shift, phi2 + 3.0 * shift).unwrap();
            let w = p.nu2() + 3e3;
            let a = c_total(w, &p).unwrap().total.norm();
            let b = c_total(w, &q).unwrap().total.norm();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300) + 1e-15);
        }

        #[test]
        fn line_shape_symmetries(d in 0.0f64..3e4) {
            let p = reference(3e4, 1e3);
            let a = c1_closed(p.nu2() + d, &p).norm();
            let b = c1_closed(p.nu2() - d, &p).norm();
            prop_assert!((a - b).abs() <= 1e-14 * a.max(1e-300));
            let c3n = |w: f64| c3_closed(w, &p).unwrap().norm() * (w - p.nu1()).abs();
            let w0 = 3.0 * p.nu1();
            prop_assert!((c3n(w0 + d) - c3n(w0 - d)).abs() <= 1e-12 * c3n(w0));
        }

        #[test]
        fn two_path_visibility(r1 in 1e4f64..6e4, r2 in 1e2f64..3e3) {
            let p = reference(r1, r2);
            let w = p.nu2();
            let amps = c_total(w, &p).unwrap();
            let mut hi = f64::MIN;
            let mut lo = f64::MAX;
            for k in 0..=360 {
                let q = p.with_phases(0.0, TAU * k as f64 / 360.0).unwrap();
                let v = c_total(w, &q).unwrap().probability();
                hi = hi.max(v);
                lo = lo.min(v);
            }
            let want = 4.0 * amps.c1.norm() * amps.c3.norm();
            // extremes sit on the 1° grid at φ₂ = 0 and π
            prop_assert!((hi - lo - want).abs() <= 1e-9 * want.max(1e-300) + 1e-18);
        }
    }
}
