//! Least-squares sinusoid fits for phase scans.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// `y ≈ offset + amplitude·cos(2π(x − phase)/period)`, amplitude ≥ 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidFit {
    pub offset: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub period: f64,
    pub rms_residual: f64,
}

/// Linear least squares at a fixed period.
pub fn fit_sinusoid(points: &[(f64, f64)], period: f64) -> Result<SinusoidFit> {
    if points.len() < 3 {
        return Err(Error::Domain("a sinusoid fit needs at least 3 points".into()));
    }
    if !(period > 0.0) || !period.is_finite() {
        return Err(Error::Domain(format!("period must be positive, got {period}")));
    }
    let k = std::f64::consts::TAU / period;
    let mut ata = Matrix3::<f64>::zeros();
    let mut aty = Vector3::<f64>::zeros();
    for &(x, y) in points {
        let row = Vector3::new(1.0, (k * x).cos(), (k * x).sin());
        ata += row * row.transpose();
        aty += row * y;
    }
    let sol = ata
        .cholesky()
        .ok_or_else(|| Error::Domain("phase samples do not determine a sinusoid".into()))?
        .solve(&aty);
    let (a, c, s) = (sol[0], sol[1], sol[2]);
    let ss: f64 = points
        .iter()
        .map(|&(x, y)| (y - a - c * (k * x).cos() - s * (k * x).sin()).powi(2))
        .sum();
    Ok(SinusoidFit {
        offset: a,
        amplitude: c.hypot(s),
        phase: s.atan2(c) / k,
        period,
        rms_residual: (ss / points.len() as f64).sqrt(),
    })
}

/// Best period in `[lo, hi]`: coarse scan of the residual followed by a
/// golden-section refinement around the best coarse node.
pub fn fit_period(points: &[(f64, f64)], lo: f64, hi: f64) -> Result<SinusoidFit> {
    if !(0.0 < lo && lo < hi) {
        return Err(Error::Domain(format!("period bracket [{lo}, {hi}] is invalid")));
    }
    let cost = |t: f64| fit_sinusoid(points, t).map(|f| f.rms_residual).unwrap_or(f64::INFINITY);
    const COARSE: usize = 400;
    let h = (hi - lo) / COARSE as f64;
    let best = (0..=COARSE)
        .map(|i| lo + i as f64 * h)
        .min_by(|a, b| cost(*a).total_cmp(&cost(*b)))
        .expect("non-empty scan");
    let (mut a, mut b) = ((best - h).max(lo), (best + h).min(hi));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (cost(c), cost(d));
    for _ in 0..100 {
        if (b - a).abs() <= 1e-12 * best.abs() {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = cost(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = cost(d);
        }
    }
    fit_sinusoid(points, 0.5 * (a + b))
}
