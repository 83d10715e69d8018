//! Peak detection on sampled spectra.

use crate::error::{Error, Result};

use super::Spectrum;

pub const DEFAULT_MIN_HEIGHT_FRAC: f64 = 0.2;
pub const DEFAULT_SMOOTH_WINDOW: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// rad/s
    pub omega_center: f64,
    pub height: f64,
    /// rad/s
    pub width_fwhm: f64,
}

/// Centered moving average; the window shrinks symmetrically near the ends.
pub fn smooth(y: &[f64], window: usize) -> Vec<f64> {
    let half = window.max(1) / 2;
    let n = y.len();
    (0..n)
        .map(|i| {
            let h = half.min(i).min(n - 1 - i);
            let s = &y[i - h..=i + h];
            s.iter().sum::<f64>() / s.len() as f64
        })
        .collect()
}

/// Local maxima of the smoothed spectrum above `min_height_frac` of its
/// global maximum. Failed grid points are skipped. Endpoints never count as
/// peaks since their centre cannot be located.
pub fn find_peaks(s: &Spectrum, min_height_frac: f64, smooth_window: usize) -> Result<Vec<Peak>> {
    let pts = s.valid();
    let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
    find_peaks_xy(&x, &y, min_height_frac, smooth_window)
}

pub fn find_peaks_xy(x: &[f64], y: &[f64], min_height_frac: f64, smooth_window: usize) -> Result<Vec<Peak>> {
    if x.len() != y.len() {
        return Err(Error::Domain("abscissa and signal lengths differ".into()));
    }
    if x.len() < 5 {
        return Err(Error::Domain(format!("peak search needs at least 5 points, got {}", x.len())));
    }
    if !(0.0..=1.0).contains(&min_height_frac) {
        return Err(Error::Domain(format!("min_height_frac must lie in [0, 1], got {min_height_frac}")));
    }
    if smooth_window == 0 {
        return Err(Error::Domain("smooth_window must be at least 1".into()));
    }
    let ys = smooth(y, smooth_window);
    let top = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(top > 0.0) {
        return Ok(Vec::new());
    }
    let floor = min_height_frac * top;
    let n = ys.len();
    let mut peaks = Vec::new();
    let mut i = 1;
    while i < n - 1 {
        // a flat top counts once, at its middle
        let mut j = i;
        while j + 1 < n - 1 && ys[j + 1] == ys[i] {
            j += 1;
        }
        if ys[i] > ys[i - 1] && ys[j] > ys[j + 1] && ys[i] >= floor && ys[i] > 0.0 {
            let k = (i + j) / 2;
            let (xc, h) = if i == j { vertex(x, &ys, k) } else { (x[k], ys[k]) };
            let width = fwhm(x, &ys, k, h);
            peaks.push(Peak { omega_center: xc, height: h, width_fwhm: width });
        }
        i = j + 1;
    }
    Ok(peaks)
}

fn vertex(x: &[f64], y: &[f64], k: usize) -> (f64, f64) {
    let (x0, x1, x2) = (x[k - 1], x[k], x[k + 1]);
    let (y0, y1, y2) = (y[k - 1], y[k], y[k + 1]);
    // Lagrange parabola through three (possibly unevenly spaced) points
    let d0 = (y1 - y0) / (x1 - x0);
    let d1 = (y2 - y1) / (x2 - x1);
    let a = (d1 - d0) / (x2 - x0);
    if !(a < 0.0) {
        return (x1, y1);
    }
    let b = d0 - a * (x0 + x1);
    let xc = (-b / (2.0 * a)).clamp(x0, x2);
    let yc = y1 + (xc - x1) * (d0 + a * (xc - x0));
    (xc, yc.max(y1))
}

fn fwhm(x: &[f64], y: &[f64], k: usize, height: f64) -> f64 {
    let half = 0.5 * height;
    let n = y.len();
    let mut l = k;
    while l > 0 && y[l - 1] > half {
        l -= 1;
    }
    let left = if l == 0 { x[0] } else { cross(x[l - 1], y[l - 1], x[l], y[l], half) };
    let mut r = k;
    while r + 1 < n && y[r + 1] > half {
        r += 1;
    }
    let right = if r + 1 == n { x[n - 1] } else { cross(x[r], y[r], x[r + 1], y[r + 1], half) };
    (right - left).max(f64::MIN_POSITIVE)
}

fn cross(x0: f64, y0: f64, x1: f64, y1: f64, level: f64) -> f64 {
    if y1 == y0 {
        return 0.5 * (x0 + x1);
    }
    x0 + (level - y0) * (x1 - x0) / (y1 - y0)
}
