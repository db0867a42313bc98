//! Sample-versus-density comparison: tabulated CDFs, the Kolmogorov-Smirnov
//! distance, and moment estimators with standard errors.

use crate::error::{Error, Result};

/// Fraction of samples tolerated outside the tabulated grid before
/// [`ks_statistic`] refuses to interpolate.
const OUT_OF_RANGE_MASS: f64 = 1e-3;

/// Asymptotic Kolmogorov-Smirnov critical value at significance 0.01.
///
/// A sample of size n drawn from the reference distribution exceeds
/// `1.63 / sqrt(n)` with probability about 1%.
pub fn ks_critical_alpha01(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

/// A cumulative distribution tabulated on an ascending grid, renormalized so
/// the last value is exactly 1.
#[derive(Debug, Clone)]
pub struct TabulatedCdf {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl TabulatedCdf {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn lo(&self) -> f64 {
        self.grid[0]
    }

    pub fn hi(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    /// Linear interpolation, clamped to [0, 1] outside the grid.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.lo() {
            return 0.0;
        }
        if x >= self.hi() {
            return 1.0;
        }
        let idx = self.grid.partition_point(|&g| g <= x);
        let (x0, x1) = (self.grid[idx - 1], self.grid[idx]);
        let (y0, y1) = (self.values[idx - 1], self.values[idx]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// Build a [`TabulatedCdf`] from a normalized density by cumulative
/// trapezoid integration on `n_grid` uniform points.
///
/// Negative density values beyond rounding noise are an error.
pub fn cdf_from_density<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    n_grid: usize,
) -> Result<TabulatedCdf> {
    if n_grid < 128 {
        return Err(Error::InvalidParameter {
            name: "n_grid",
            value: n_grid as f64,
        });
    }
    if !(lo < hi) {
        return Err(Error::InvalidParameter {
            name: "lo..hi",
            value: hi - lo,
        });
    }
    let h = (hi - lo) / (n_grid - 1) as f64;
    let grid: Vec<f64> = (0..n_grid).map(|i| lo + i as f64 * h).collect();
    let mut density: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    if density.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("density"));
    }
    let peak = density.iter().copied().fold(0.0f64, f64::max);
    if density.iter().any(|&v| v < -1e-12 * peak.max(1.0)) {
        return Err(Error::NonPositiveNormalization(
            density.iter().copied().fold(f64::INFINITY, f64::min),
        ));
    }
    for v in density.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }

    let mut values = Vec::with_capacity(n_grid);
    values.push(0.0);
    let mut acc = 0.0;
    for i in 1..n_grid {
        acc += 0.5 * (density[i] + density[i - 1]) * h;
        values.push(acc);
    }
    if !(acc > 0.0) {
        return Err(Error::NonPositiveNormalization(acc));
    }
    for v in values.iter_mut() {
        *v /= acc;
    }
    Ok(TabulatedCdf { grid, values })
}

/// Kolmogorov-Smirnov distance `sup_x |F_emp(x) - F(x)|` between samples and
/// a tabulated reference CDF.
///
/// Both one-sided gaps are evaluated at every sample point. Requires at
/// least 10 samples; fails if more than a 1e-3 fraction of the samples
/// falls outside the grid.
pub fn ks_statistic(samples: &[f64], cdf: &TabulatedCdf) -> Result<f64> {
    if samples.len() < 10 {
        return Err(Error::NotEnoughSamples {
            got: samples.len(),
            need: 10,
        });
    }
    let out = samples
        .iter()
        .filter(|&&x| x < cdf.lo() || x > cdf.hi())
        .count();
    let frac = out as f64 / samples.len() as f64;
    if frac > OUT_OF_RANGE_MASS {
        return Err(Error::SamplesOutOfRange(frac));
    }

    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let fx = cdf.eval(x);
        d = d.max(fx - i as f64 / n);
        d = d.max((i + 1) as f64 / n - fx);
    }
    Ok(d)
}

/// Mean and unbiased variance with asymptotic standard errors.
#[derive(Debug, Clone, Copy)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub std_error_mean: f64,
    pub std_error_variance: f64,
}

/// Sample moments; the variance standard error uses the fourth central
/// moment, `var(s^2) ~ (m4 - m2^2 (n-3)/(n-1)) / n`.
pub fn moments(samples: &[f64]) -> Result<Moments> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::NotEnoughSamples { got: n, need: 2 });
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let mut m2 = 0.0;
    let mut m4 = 0.0;
    for &x in samples {
        let d = x - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= nf;
    m4 /= nf;
    let variance = m2 * nf / (nf - 1.0);
    let var_of_var = ((m4 - m2 * m2 * (nf - 3.0) / (nf - 1.0)) / nf).max(0.0);
    Ok(Moments {
        mean,
        variance,
        std_error_mean: (variance / nf).sqrt(),
        std_error_variance: var_of_var.sqrt(),
    })
}
