//! Adaptive Simpson quadrature and grid-scan peak finding.
//!
//! The analytic laws are written up to proportionality, so the crate
//! normalizes numerically: [`normalize_1d`] returns the constant the caller
//! divides by. Peak locations back the figure outputs and several
//! acceptance checks.

use crate::error::{Error, Result};

const MAX_DEPTH: usize = 40;

/// Peak suppression threshold relative to the global maximum.
const PEAK_FLOOR: f64 = 1e-6;

/// A local maximum located by [`find_peaks`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub location: f64,
    pub height: f64,
}

/// Integral of a non-negative function, for use as a normalization constant.
///
/// Adaptive Simpson with Richardson extrapolation, recursion depth capped at
/// 40; the target is `|integral - Z| <= tol * Z`. Errors on non-finite
/// integrand values and on a non-positive result.
pub fn normalize_1d<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(lo < hi) {
        return Err(Error::InvalidParameter {
            name: "lo..hi",
            value: hi - lo,
        });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: tol,
        });
    }
    let z = adaptive_simpson(&f, lo, hi, tol)?;
    if !(z > 0.0) {
        return Err(Error::NonPositiveNormalization(z));
    }
    Ok(z)
}

/// Adaptive Simpson integral with relative tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let eval = |x: f64| -> Result<f64> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFinite("integrand"))
        }
    };

    // seed the absolute budget from a coarse composite-Simpson estimate so a
    // relative tolerance is meaningful even when the head estimate is poor
    let mut coarse = 0.0;
    let pieces = 32;
    let h = (hi - lo) / pieces as f64;
    let mut prev = eval(lo)?;
    for i in 0..pieces {
        let a = lo + i as f64 * h;
        let mid = eval(a + 0.5 * h)?;
        let right = eval(a + h)?;
        coarse += h / 6.0 * (prev + 4.0 * mid + right);
        prev = right;
    }
    let eps = tol * coarse.abs().max(f64::MIN_POSITIVE);

    let fa = eval(lo)?;
    let fb = eval(0.5 * (lo + hi))?;
    let fc = eval(hi)?;
    let whole = (hi - lo) / 6.0 * (fa + 4.0 * fb + fc);
    simpson_step(&eval, lo, hi, fa, fb, fc, whole, eps, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<E: Fn(f64) -> Result<f64>>(
    eval: &E,
    a: f64,
    c: f64,
    fa: f64,
    fb: f64,
    fc: f64,
    whole: f64,
    eps: f64,
    depth: usize,
) -> Result<f64> {
    let b = 0.5 * (a + c);
    let d = 0.5 * (a + b);
    let e = 0.5 * (b + c);
    let fd = eval(d)?;
    let fe = eval(e)?;
    let left = (b - a) / 6.0 * (fa + 4.0 * fd + fb);
    let right = (c - b) / 6.0 * (fb + 4.0 * fe + fc);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return Ok(left + right + delta / 15.0);
    }
    let half = 0.5 * eps;
    Ok(simpson_step(eval, a, b, fa, fd, fb, left, half, depth - 1)?
        + simpson_step(eval, b, c, fb, fe, fc, right, half, depth - 1)?)
}

/// Locate interior local maxima of `f` on `[lo, hi]`.
///
/// Scans `n_scan` uniform intervals for a sign change of the discrete slope,
/// then refines each bracketed maximum by golden-section search to an
/// interval below 1e-6. Peaks below `1e-6` of the tallest located value are
/// dropped as numerical ripple. Returned sorted by location.
pub fn find_peaks<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n_scan: usize) -> Result<Vec<Peak>> {
    if n_scan < 64 {
        return Err(Error::InvalidParameter {
            name: "n_scan",
            value: n_scan as f64,
        });
    }
    if !(lo < hi) {
        return Err(Error::InvalidParameter {
            name: "lo..hi",
            value: hi - lo,
        });
    }
    let h = (hi - lo) / n_scan as f64;
    let ys: Vec<f64> = (0..=n_scan).map(|i| f(lo + i as f64 * h)).collect();
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::NonFinite("peak scan"));
    }

    let mut peaks = Vec::new();
    for i in 1..n_scan {
        let rising = ys[i] > ys[i - 1];
        let falling = ys[i + 1] < ys[i];
        if rising && falling {
            let (x, y) = golden_section_max(&f, lo + (i - 1) as f64 * h, lo + (i + 1) as f64 * h);
            peaks.push(Peak {
                location: x,
                height: y,
            });
        }
    }

    let top = peaks.iter().map(|p| p.height).fold(0.0f64, f64::max);
    peaks.retain(|p| p.height >= PEAK_FLOOR * top);
    peaks.sort_by(|p, q| p.location.partial_cmp(&q.location).unwrap());
    Ok(peaks)
}

/// Golden-section search for the maximum of a unimodal bracket.
fn golden_section_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > 1e-6 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}
