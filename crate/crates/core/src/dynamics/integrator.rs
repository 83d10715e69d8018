//! Explicit Runge–Kutta integrators over complex matrix states.
//!
//! [`dopri5`] is the Dormand–Prince 5(4) pair with step-size control and
//! Hairer's 4th-order continuous extension for sampling on a fixed output
//! grid. [`rk4`] is the classical fixed-step scheme kept for order checks.

use nalgebra::{allocator::Allocator, DefaultAllocator, Dim, OMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Vector-space operations the integrators need from a state.
pub trait OdeState: Clone {
    /// `self += a * x`
    fn add_scaled(&mut self, a: f64, x: &Self);
    /// `self *= a`
    fn scale_mut(&mut self, a: f64);
    /// RMS of `err_i / (atol + rtol * max(|y0_i|, |y1_i|))`.
    fn error_norm(err: &Self, y0: &Self, y1: &Self, rtol: f64, atol: f64) -> f64;
}

impl<R: Dim, C: Dim> OdeState for OMatrix<Complex64, R, C>
where
    DefaultAllocator: Allocator<R, C>,
{
    #[inline]
    fn add_scaled(&mut self, a: f64, x: &Self) {
        for (s, xi) in self.iter_mut().zip(x.iter()) {
            *s += xi * a;
        }
    }

    #[inline]
    fn scale_mut(&mut self, a: f64) {
        for s in self.iter_mut() {
            *s *= a;
        }
    }

    fn error_norm(err: &Self, y0: &Self, y1: &Self, rtol: f64, atol: f64) -> f64 {
        let mut acc = 0.0;
        let mut n = 0usize;
        for ((e, a), b) in err.iter().zip(y0.iter()).zip(y1.iter()) {
            let sc = atol + rtol * a.norm().max(b.norm());
            let r = e.norm() / sc;
            acc += r * r;
            n += 1;
        }
        (acc / n.max(1) as f64).sqrt()
    }
}

fn lin_comb<S: OdeState>(base: &S, terms: &[(f64, &S)]) -> S {
    let mut out = base.clone();
    for (a, x) in terms {
        if *a != 0.0 {
            out.add_scaled(*a, x);
        }
    }
    out
}

/// `sum a_i x_i`; `terms` must be non-empty.
fn combo<S: OdeState>(terms: &[(f64, &S)]) -> S {
    let (a0, x0) = terms[0];
    let mut out = x0.clone();
    out.scale_mut(a0);
    for (a, x) in &terms[1..] {
        out.add_scaled(*a, x);
    }
    out
}

/// Controls for [`dopri5`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on |h|.
    pub max_step: f64,
    /// Number of output samples, endpoints included (≥ 2).
    pub samples: usize,
    /// Hard cap on attempted steps.
    pub max_steps: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            samples: 2,
            max_steps: 50_000_000,
        }
    }
}

/// Dense samples of a solution plus step statistics.
#[derive(Debug, Clone)]
pub struct Solution<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub accepted: usize,
    pub rejected: usize,
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// continuous extension
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
///
/// Samples are returned on `opts.samples` equally spaced times; the last
/// sample is the final step's state, not an interpolant.
pub fn dopri5<S, F>(mut f: F, t0: f64, t1: f64, y0: S, opts: &AdaptiveOptions) -> Result<Solution<S>>
where
    S: OdeState,
    F: FnMut(f64, &S) -> S,
{
    if !(opts.rel_tol > 0.0) || !(opts.abs_tol > 0.0) {
        return Err(Error::Domain("integrator tolerances must be positive".into()));
    }
    if !(opts.max_step > 0.0) {
        return Err(Error::Domain("max_step must be positive".into()));
    }
    if opts.samples < 2 {
        return Err(Error::Domain("at least two output samples are required".into()));
    }
    let span = t1 - t0;
    let n_out = opts.samples;
    let sample_t = |i: usize| {
        if i + 1 == n_out {
            t1
        } else {
            t0 + span * (i as f64) / ((n_out - 1) as f64)
        }
    };

    let mut times = Vec::with_capacity(n_out);
    let mut states = Vec::with_capacity(n_out);
    times.push(t0);
    states.push(y0.clone());
    if span == 0.0 {
        for i in 1..n_out {
            times.push(sample_t(i));
            states.push(y0.clone());
        }
        return Ok(Solution { times, states, accepted: 0, rejected: 0 });
    }

    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = initial_step(&mut f, t, &y, &k1, dir, span.abs(), opts);
    let mut next_out = 1usize;
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut prev_err = 1e-4_f64;
    let mut last_rejected = false;

    while next_out < n_out {
        if accepted + rejected >= opts.max_steps {
            return Err(Error::Integration { t, reason: format!("exceeded {} steps", opts.max_steps) });
        }
        let remaining = (t1 - t).abs();
        let mut step = h.min(opts.max_step).min(remaining);
        // land exactly on t1 rather than leaving a sliver
        if remaining - step < 1e-12 * remaining.max(step) {
            step = remaining;
        }
        if step <= 10.0 * f64::EPSILON * t.abs().max(span.abs()) {
            return Err(Error::Integration { t, reason: format!("step size underflow (h = {step:e})") });
        }
        let hs = dir * step;

        let k2 = f(t + C2 * hs, &lin_comb(&y, &[(hs * A21, &k1)]));
        let k3 = f(t + C3 * hs, &lin_comb(&y, &[(hs * A31, &k1), (hs * A32, &k2)]));
        let k4 = f(t + C4 * hs, &lin_comb(&y, &[(hs * A41, &k1), (hs * A42, &k2), (hs * A43, &k3)]));
        let k5 = f(
            t + C5 * hs,
            &lin_comb(&y, &[(hs * A51, &k1), (hs * A52, &k2), (hs * A53, &k3), (hs * A54, &k4)]),
        );
        let t_new = if step == remaining { t1 } else { t + hs };
        let k6 = f(
            t + hs,
            &lin_comb(&y, &[(hs * A61, &k1), (hs * A62, &k2), (hs * A63, &k3), (hs * A64, &k4), (hs * A65, &k5)]),
        );
        let y_new = lin_comb(&y, &[(hs * A71, &k1), (hs * A73, &k3), (hs * A74, &k4), (hs * A75, &k5), (hs * A76, &k6)]);
        let k7 = f(t_new, &y_new);

        let err_vec = combo(&[
            (hs * E1, &k1),
            (hs * E3, &k3),
            (hs * E4, &k4),
            (hs * E5, &k5),
            (hs * E6, &k6),
            (hs * E7, &k7),
        ]);
        let err = S::error_norm(&err_vec, &y, &y_new, opts.rel_tol, opts.abs_tol);
        if !err.is_finite() {
            return Err(Error::Integration { t, reason: "non-finite error estimate".into() });
        }

        if err <= 1.0 {
            // PI controller (Hairer's beta = 0.04)
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2 + 0.04 * 0.75) * prev_err.powf(0.04)).clamp(0.2, 5.0)
            };
            prev_err = err.max(1e-4);

            // dense output for any samples inside (t, t_new]
            let ydiff = combo(&[(1.0, &y_new), (-1.0, &y)]);
            let bspl = combo(&[(hs, &k1), (-1.0, &ydiff)]);
            let r4 = combo(&[(1.0, &ydiff), (-hs, &k7), (-1.0, &bspl)]);
            let r5 = combo(&[
                (hs * D1, &k1),
                (hs * D3, &k3),
                (hs * D4, &k4),
                (hs * D5, &k5),
                (hs * D6, &k6),
                (hs * D7, &k7),
            ]);
            while next_out < n_out {
                let ts = sample_t(next_out);
                let inside = if dir > 0.0 { ts <= t_new } else { ts >= t_new };
                if !inside {
                    break;
                }
                if next_out + 1 == n_out || ts == t_new {
                    times.push(ts);
                    states.push(y_new.clone());
                } else {
                    let th = (ts - t) / hs;
                    let th1 = 1.0 - th;
                    // y + th (ydiff + th1 (bspl + th (r4 + th1 r5)))
                    let inner = lin_comb(&r4, &[(th1, &r5)]);
                    let inner = lin_comb(&bspl, &[(th, &inner)]);
                    let inner = lin_comb(&ydiff, &[(th1, &inner)]);
                    times.push(ts);
                    states.push(lin_comb(&y, &[(th, &inner)]));
                }
                next_out += 1;
            }

            t = t_new;
            y = y_new;
            k1 = k7;
            accepted += 1;
            h = if last_rejected { step * fac.min(1.0) } else { step * fac };
            last_rejected = false;
        } else {
            rejected += 1;
            last_rejected = true;
            h = step * (0.9 * err.powf(-0.2)).max(0.2);
        }
    }

    Ok(Solution { times, states, accepted, rejected })
}

fn initial_step<S, F>(f: &mut F, t: f64, y: &S, k1: &S, dir: f64, span: f64, opts: &AdaptiveOptions) -> f64
where
    S: OdeState,
    F: FnMut(f64, &S) -> S,
{
    let mut zero = y.clone();
    zero.scale_mut(0.0);
    let d0 = S::error_norm(y, &zero, y, opts.rel_tol, opts.abs_tol);
    let d1 = S::error_norm(k1, &zero, y, opts.rel_tol, opts.abs_tol);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
    h0 = h0.min(opts.max_step).min(span);
    let y1 = lin_comb(y, &[(dir * h0, k1)]);
    let k2 = f(t + dir * h0, &y1);
    let dk = combo(&[(1.0, &k2), (-1.0, k1)]);
    let d2 = S::error_norm(&dk, &zero, y, opts.rel_tol, opts.abs_tol) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6 * span)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(opts.max_step).min(span)
}

/// Classical fixed-step 4th-order Runge–Kutta over `n` equal steps.
pub fn rk4<S, F>(mut f: F, t0: f64, t1: f64, y0: S, n: usize) -> S
where
    S: OdeState,
    F: FnMut(f64, &S) -> S,
{
    let h = (t1 - t0) / n as f64;
    let mut y = y0;
    for i in 0..n {
        let t = t0 + i as f64 * h;
        let k1 = f(t, &y);
        let k2 = f(t + 0.5 * h, &lin_comb(&y, &[(0.5 * h, &k1)]));
        let k3 = f(t + 0.5 * h, &lin_comb(&y, &[(0.5 * h, &k2)]));
        let k4 = f(t + h, &lin_comb(&y, &[(h, &k3)]));
        y = lin_comb(&y, &[(h / 6.0, &k1), (h / 3.0, &k2), (h / 3.0, &k3), (h / 6.0, &k4)]);
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Vector1, Vector2};

    type V1 = Vector1<Complex64>;

    #[test]
    fn exponential_rotation_and_dense_output() {
        // y' = i w y, y = exp(i w t)
        let w = 7.0;
        let opts = AdaptiveOptions { rel_tol: 1e-10, abs_tol: 1e-12, samples: 101, ..Default::default() };
        let sol = dopri5(
            |_t, y: &V1| y * Complex64::new(0.0, w),
            0.0,
            3.0,
            V1::new(Complex64::from(1.0)),
            &opts,
        )
        .unwrap();
        assert_eq!(sol.times.len(), 101);
        assert_eq!(*sol.times.last().unwrap(), 3.0);
        for (t, y) in sol.times.iter().zip(&sol.states) {
            let exact = Complex64::new(0.0, w * t).exp();
            assert!((y[0] - exact).norm() < 1e-8, "t={t} err={}", (y[0] - exact).norm());
        }
        assert!(sol.accepted > 10);
    }

    #[test]
    fn backward_integration() {
        let sol = dopri5(
            |_t, y: &V1| -y,
            2.0,
            0.0,
            V1::new(Complex64::from((-2.0f64).exp())),
            &AdaptiveOptions { rel_tol: 1e-11, abs_tol: 1e-14, samples: 5, ..Default::default() },
        )
        .unwrap();
        assert_eq!(sol.times, vec![2.0, 1.5, 1.0, 0.5, 0.0]);
        assert!((sol.states[4][0].re - 1.0).abs() < 1e-9);
        assert!((sol.states[2][0].re - (-1.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn max_step_respected() {
        let opts = AdaptiveOptions { max_step: 0.01, ..Default::default() };
        let sol = dopri5(|_t, y: &V1| y * Complex64::from(0.0), 0.0, 1.0, V1::new(Complex64::from(1.0)), &opts).unwrap();
        assert!(sol.accepted >= 100);
    }

    #[test]
    fn blow_up_reports_time() {
        // y' = y² blows up at t = 1
        let r = dopri5(
            |_t, y: &V1| y.component_mul(y),
            0.0,
            2.0,
            V1::new(Complex64::from(1.0)),
            &AdaptiveOptions { max_steps: 100_000, ..Default::default() },
        );
        match r {
            Err(Error::Integration { t, .. }) => assert!(t > 0.9 && t <= 1.0, "{t}"),
            other => panic!("expected integration error, got {other:?}"),
        }
    }

    #[test]
    fn rk4_fourth_order() {
        let f = |_t: f64, y: &Vector2<Complex64>| Vector2::new(y[1], -y[0]);
        let y0 = Vector2::new(Complex64::from(1.0), Complex64::from(0.0));
        let err = |n| (rk4(f, 0.0, 5.0, y0, n)[0] - Complex64::from(5.0f64.cos())).norm();
        let ratio = err(50) / err(100);
        assert!((ratio.log2() - 4.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn rejects_bad_options() {
        let y = V1::new(Complex64::from(1.0));
        let f = |_t: f64, y: &V1| *y;
        assert!(dopri5(f, 0.0, 1.0, y, &AdaptiveOptions { rel_tol: 0.0, ..Default::default() }).is_err());
        assert!(dopri5(f, 0.0, 1.0, y, &AdaptiveOptions { samples: 1, ..Default::default() }).is_err());
    }
}
