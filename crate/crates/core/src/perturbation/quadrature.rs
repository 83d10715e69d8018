//! Numerical integration kernels for the perturbative oracles.

use num_complex::Complex64;
use std::collections::BinaryHeap;
use std::cmp::Ordering;

use crate::error::{Error, Result};

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gauss_kronrod<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += s * WGK[j];
        // odd Kronrod indices coincide with the Gauss nodes
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    let k = k * h;
    let g = g * h;
    (k, (k - g).norm())
}

struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Segment {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature of a complex integrand.
///
/// The interval is first cut into `initial_pieces` equal segments (use one
/// per oscillation period or so), then the worst segment is bisected until the
/// summed error estimate falls below `abs_tol`.
pub fn integrate_adaptive<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    initial_pieces: usize,
    max_segments: usize,
) -> Result<Complex64> {
    let n0 = initial_pieces.max(1);
    let w = (b - a) / n0 as f64;
    let mut heap = BinaryHeap::with_capacity(2 * n0);
    let mut total = Complex64::from(0.0);
    let mut err = 0.0;
    for i in 0..n0 {
        let sa = a + i as f64 * w;
        let sb = if i + 1 == n0 { b } else { sa + w };
        let (v, e) = gauss_kronrod(&f, sa, sb);
        total += v;
        err += e;
        heap.push(Segment { a: sa, b: sb, value: v, err: e });
    }
    while !(err <= abs_tol) {
        if heap.len() >= max_segments {
            return Err(Error::Quadrature { estimate: err, target: abs_tol });
        }
        let worst = heap.pop().expect("non-empty");
        let m = 0.5 * (worst.a + worst.b);
        let (v1, e1) = gauss_kronrod(&f, worst.a, m);
        let (v2, e2) = gauss_kronrod(&f, m, worst.b);
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.err;
        if worst.err > 1e6 * err.abs() {
            // the running sum lost its digits to cancellation
            err = heap.iter().map(|s| s.err).sum::<f64>() + e1 + e2;
        }
        heap.push(Segment { a: worst.a, b: m, value: v1, err: e1 });
        heap.push(Segment { a: m, b: worst.b, value: v2, err: e2 });
    }
    // re-sum to shed accumulated rounding from the incremental updates
    Ok(heap.iter().map(|s| s.value).sum())
}

/// Running integral `F[k] = ∫_{x_0}^{x_k} f` of samples on a uniform grid.
///
/// Each cell is integrated exactly for the cubic through the four nearest
/// samples (one-sided at the ends), so the rule is 4th-order accurate.
pub fn cumulative_cubic(f: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = f.len();
    let mut out = vec![Complex64::from(0.0); n];
    if n < 2 {
        return out;
    }
    if n < 4 {
        for k in 1..n {
            out[k] = out[k - 1] + (f[k - 1] + f[k]) * (0.5 * h);
        }
        return out;
    }
    let c = h / 24.0;
    for k in 0..n - 1 {
        let cell = if k == 0 {
            (f[0] * 9.0 + f[1] * 19.0 - f[2] * 5.0 + f[3]) * c
        } else if k == n - 2 {
            (f[n - 4] - f[n - 3] * 5.0 + f[n - 2] * 19.0 + f[n - 1] * 9.0) * c
        } else {
            (-f[k - 1] + f[k] * 13.0 + f[k + 1] * 13.0 - f[k + 2]) * c
        };
        out[k + 1] = out[k] + cell;
    }
    out
}
