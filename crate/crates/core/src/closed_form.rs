//! The analytic outcome distributions of the perturbed-measurement model.
//!
//! Two-level system, maximally mixed state:
//!
//! ```text
//! p(r) = (1/a) sqrt(c/pi) r sinh(2acr) exp(-c (r^2 + a^2))               (sinh form)
//!      = (1/2a) sqrt(c/pi) r [exp(-c (r-a)^2) - exp(-c (r+a)^2)]         (peak form)
//! ```
//!
//! Two-level system, general state with average `eta = tr(rho A)`:
//!
//! ```text
//! p(x) ∝ x [E- - E+] + (eta/a) [(x - 1/(2ac)) E- + (x + 1/(2ac)) E+],
//! E∓ = exp(-c (x ∓ a)^2)
//! ```
//!
//! N-level joint eigenvalue law under the matrix weight
//! `exp(-c1 tr B^2 - c2 (tr B)^2)`, in two algebraically equal forms
//! (determinant and signed permutation sum), its 2x2 sum/difference
//! factorization, and the steepest-descent single-outcome marginal
//!
//! ```text
//! p(x) ∝ sum_k exp(-c (x - a_k)^2) prod_{m != k} |x - a_m| / |a_k - a_m|
//! ```
//!
//! The joint laws are evaluated unnormalized (their constant depends only on
//! N and the model); the 1-D laws normalize through [`normalize_1d`].

use crate::error::{Error, Result};
use crate::error_model::ErrorModel;
use crate::hermitian::vandermonde;
use crate::quad::normalize_1d;

/// Minimum allowed gap between eigenvalues of the unperturbed observable.
pub const SPECTRUM_MIN_GAP: f64 = 1e-9;

/// Minimum allowed gap between eigenvalue arguments of the determinant form.
const ARGUMENT_MIN_GAP: f64 = 1e-12;

/// Relative tolerance used for the internal normalization integrals.
const NORM_TOL: f64 = 1e-11;

/// Eigenvalues of the unperturbed observable, pairwise distinct.
///
/// Distinctness (gap above 1e-9) is required because the joint law divides
/// by the Vandermonde product of these values; confluent limits are not
/// implemented.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("spectrum"));
        }
        if let Some(gap) = min_gap(&values) {
            if gap <= SPECTRUM_MIN_GAP {
                return Err(Error::DegenerateSpectrum(gap));
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn min_gap(values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n < 2 {
        return None;
    }
    let mut gap = f64::INFINITY;
    for k in 0..n {
        for l in (k + 1)..n {
            gap = gap.min((values[k] - values[l]).abs());
        }
    }
    Some(gap)
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::InvalidParameter { name, value });
    }
    Ok(())
}

/// Outcome density for a two-level observable `diag(a, -a)` in the
/// maximally mixed state, error constant `c`.
///
/// Evaluated in the peak-displaying form, which stays finite where the sinh
/// form overflows; the two forms are algebraically identical. Normalized
/// analytically: the constant is `(1/2a) sqrt(c/pi)`.
pub fn pdf2_uniform(r: f64, a: f64, c: f64) -> Result<f64> {
    check_positive("a", a)?;
    check_positive("c", c)?;
    let norm = 0.5 / a * (c / std::f64::consts::PI).sqrt();
    let em = (-c * (r - a) * (r - a)).exp();
    let ep = (-c * (r + a) * (r + a)).exp();
    Ok(norm * r * (em - ep))
}

/// The mixed-state two-level density with state average `eta = tr(rho A)`,
/// normalized numerically at construction.
///
/// The normalization window is `|x| <= a + 8/sqrt(c)`; outside it the density
/// is below 1e-27 of the peak scale.
#[derive(Debug, Clone)]
pub struct Pdf2Mixed {
    a: f64,
    c: f64,
    eta: f64,
    norm: f64,
    window: f64,
}

impl Pdf2Mixed {
    pub fn new(a: f64, c: f64, eta: f64) -> Result<Self> {
        check_positive("a", a)?;
        check_positive("c", c)?;
        if !(eta.abs() <= a) {
            return Err(Error::InvalidParameter {
                name: "eta",
                value: eta,
            });
        }
        let window = a + 8.0 / c.sqrt();
        let z = normalize_1d(|x| raw_mixed(x, a, c, eta), -window, window, NORM_TOL)?;
        Ok(Self {
            a,
            c,
            eta,
            norm: z,
            window,
        })
    }

    pub fn density(&self, x: f64) -> f64 {
        raw_mixed(x, self.a, self.c, self.eta) / self.norm
    }

    /// The constant the raw form was divided by. Equals `2a sqrt(pi/c)`
    /// independent of eta, since the eta bracket integrates to zero.
    pub fn normalization(&self) -> f64 {
        self.norm
    }

    pub fn window(&self) -> f64 {
        self.window
    }
}

fn raw_mixed(x: f64, a: f64, c: f64, eta: f64) -> f64 {
    let em = (-c * (x - a) * (x - a)).exp();
    let ep = (-c * (x + a) * (x + a)).exp();
    let shift = 1.0 / (2.0 * a * c);
    x * (em - ep) + eta / a * ((x - shift) * em + (x + shift) * ep)
}

/// One-shot evaluation of the normalized mixed-state density.
///
/// Computes the normalization on every call; batch callers should hold a
/// [`Pdf2Mixed`].
pub fn pdf2_mixed(x: f64, a: f64, c: f64, eta: f64) -> Result<f64> {
    Ok(Pdf2Mixed::new(a, c, eta)?.density(x))
}

/// Unnormalized joint eigenvalue density in determinant form:
/// `(Δ(r)/Δ(a)) det[exp(2 c1 r_k a_l)] exp(-c1 Σ(r_k^2 + a_k^2) - c2 (Σr - Σa)^2)`.
///
/// The exponential matrix is scaled by its per-row maximum exponent before
/// the LU factorization, so the determinant stays inside the double range
/// for exponents far beyond what `exp` tolerates entrywise.
pub fn joint_pdf_det(r: &[f64], a: &Spectrum, model: &ErrorModel) -> Result<f64> {
    let n = a.len();
    if r.len() != n {
        return Err(Error::DimensionMismatch {
            left: r.len(),
            right: n,
        });
    }
    if let Some(gap) = min_gap(r) {
        if gap <= ARGUMENT_MIN_GAP {
            return Err(Error::DegenerateArguments(gap));
        }
    }
    let c1 = model.c1();
    let av = a.values();

    let mut scaled = vec![0.0; n * n];
    let mut row_max_sum = 0.0;
    for k in 0..n {
        let mut row_max = f64::NEG_INFINITY;
        for &al in av {
            row_max = row_max.max(2.0 * c1 * r[k] * al);
        }
        for (l, &al) in av.iter().enumerate() {
            scaled[k * n + l] = (2.0 * c1 * r[k] * al - row_max).exp();
        }
        row_max_sum += row_max;
    }
    let det = lu_determinant(&mut scaled, n);

    let sum_sq: f64 = r.iter().map(|v| v * v).sum::<f64>() + av.iter().map(|v| v * v).sum::<f64>();
    let shift = r.iter().sum::<f64>() - av.iter().sum::<f64>();
    let exponent = row_max_sum - c1 * sum_sq - model.c2() * shift * shift;

    Ok(vandermonde(r) / vandermonde(av) * det * exponent.exp())
}

/// Unnormalized joint eigenvalue density as a signed permutation sum:
/// `(Δ(r)/Δ(a)) Σ_σ sgn(σ) exp(-c1 Σ_k (r_k - a_{σ(k)})^2 - c2 (Σr - Σa)^2)`.
///
/// Algebraically identical to [`joint_pdf_det`]; repeated `r` entries are
/// allowed here (the sum is manifestly finite and vanishes there).
pub fn joint_pdf_permsum(r: &[f64], a: &Spectrum, model: &ErrorModel) -> Result<f64> {
    let n = a.len();
    if r.len() != n {
        return Err(Error::DimensionMismatch {
            left: r.len(),
            right: n,
        });
    }
    let c1 = model.c1();
    let av = a.values();

    // collect the exponent of every permutation term, then combine around
    // the largest to avoid underflowing the whole sum
    let mut exponents = Vec::new();
    let mut signs = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0f64;
    heap_permutations(&mut perm, &mut sign, &mut |p, s| {
        let e: f64 = (0..n)
            .map(|k| {
                let d = r[k] - av[p[k]];
                -c1 * d * d
            })
            .sum();
        exponents.push(e);
        signs.push(s);
    });
    let top = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut acc = 0.0;
    for (e, s) in exponents.iter().zip(signs.iter()) {
        acc += s * (e - top).exp();
    }

    let shift = r.iter().sum::<f64>() - av.iter().sum::<f64>();
    let exponent = top - model.c2() * shift * shift;
    Ok(vandermonde(r) / vandermonde(av) * acc * exponent.exp())
}

/// Visit all permutations of `perm` by Heap's algorithm, tracking the sign.
fn heap_permutations(perm: &mut Vec<usize>, sign: &mut f64, visit: &mut impl FnMut(&[usize], f64)) {
    fn inner(
        k: usize,
        perm: &mut Vec<usize>,
        sign: &mut f64,
        visit: &mut impl FnMut(&[usize], f64),
    ) {
        if k == 1 {
            visit(perm, *sign);
            return;
        }
        for i in 0..k {
            inner(k - 1, perm, sign, visit);
            if i < k - 1 {
                if k.is_multiple_of(2) {
                    perm.swap(i, k - 1);
                } else {
                    perm.swap(0, k - 1);
                }
                *sign = -*sign;
            }
        }
    }
    let n = perm.len();
    inner(n, perm, sign, visit);
}

/// LU determinant with partial pivoting; consumes the row-major buffer.
fn lu_determinant(m: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let mut pivot = col;
        let mut best = m[col * n + col].abs();
        for row in (col + 1)..n {
            let v = m[row * n + col].abs();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for j in 0..n {
                m.swap(col * n + j, pivot * n + j);
            }
            det = -det;
        }
        let diag = m[col * n + col];
        det *= diag;
        for row in (col + 1)..n {
            let factor = m[row * n + col] / diag;
            for j in (col + 1)..n {
                m[row * n + j] -= factor * m[col * n + j];
            }
        }
    }
    det
}

/// The 2x2 joint law factored over sum and difference of the eigenvalues:
/// `exp(-(c2 + c1/2)(r1+r2)^2) (r1-r2) sinh(2 a c1 (r1-r2)) exp(-c1 (r1-r2)^2 / 2)`.
///
/// The factorization exhibits the two error channels: `c2` only shifts both
/// eigenvalues together (the Gaussian sum factor), `c1` only drives their
/// gap (the sinh factor, which carries the level repulsion zero at
/// `r1 = r2`).
pub fn joint_pdf2_sumdiff(r1: f64, r2: f64, a: f64, model: &ErrorModel) -> Result<f64> {
    check_positive("a", a)?;
    let c1 = model.c1();
    let c2 = model.c2();
    let sum = r1 + r2;
    let diff = r1 - r2;
    Ok((-(c2 + 0.5 * c1) * sum * sum).exp()
        * diff
        * (2.0 * a * c1 * diff).sinh()
        * (-0.5 * c1 * diff * diff).exp())
}

/// Steepest-descent approximation to the single-outcome density for an
/// observable with the given spectrum, normalized at construction.
///
/// `c` is the combined constant `c1 + c2` of the matrix weight.
#[derive(Debug, Clone)]
pub struct SteepestDescentMarginal {
    spectrum: Spectrum,
    c: f64,
    norm: f64,
    lo: f64,
    hi: f64,
}

impl SteepestDescentMarginal {
    pub fn new(spectrum: Spectrum, c: f64) -> Result<Self> {
        check_positive("c", c)?;
        let pad = 8.0 / c.sqrt();
        let lo = spectrum.min() - pad;
        let hi = spectrum.max() + pad;
        let norm = normalize_1d(|x| raw_marginal_sd(x, spectrum.values(), c), lo, hi, NORM_TOL)?;
        Ok(Self {
            spectrum,
            c,
            norm,
            lo,
            hi,
        })
    }

    pub fn density(&self, x: f64) -> f64 {
        raw_marginal_sd(x, self.spectrum.values(), self.c) / self.norm
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }
}

fn raw_marginal_sd(x: f64, a: &[f64], c: f64) -> f64 {
    let mut total = 0.0;
    for k in 0..a.len() {
        let mut term = (-c * (x - a[k]) * (x - a[k])).exp();
        for m in 0..a.len() {
            if m != k {
                term *= (x - a[m]).abs() / (a[k] - a[m]).abs();
            }
        }
        total += term;
    }
    total
}

/// One-shot evaluation of the normalized steepest-descent marginal.
pub fn marginal_sd(x: f64, spectrum: &Spectrum, c: f64) -> Result<f64> {
    Ok(SteepestDescentMarginal::new(spectrum.clone(), c)?.density(x))
}

/// A 1-D density tabulated on a uniform grid, self-normalized so that its
/// own trapezoid integral is 1.
#[derive(Debug, Clone)]
pub struct DensityGrid {
    grid: Vec<f64>,
    values: Vec<f64>,
    norm_constant: f64,
}

impl DensityGrid {
    /// Tabulate `f` on `n_points` uniform points over `[lo, hi]` and
    /// normalize by the trapezoid rule on that same grid.
    ///
    /// Raw values more negative than `-1e-12` of the peak are rejected;
    /// smaller negatives (rounding of analytically non-negative laws) are
    /// clamped to zero.
    pub fn from_fn<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::InvalidParameter {
                name: "n_points",
                value: n_points as f64,
            });
        }
        if !(lo < hi) {
            return Err(Error::InvalidParameter {
                name: "lo..hi",
                value: hi - lo,
            });
        }
        let h = (hi - lo) / (n_points - 1) as f64;
        let mut values: Vec<f64> = (0..n_points).map(|i| f(lo + i as f64 * h)).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("density grid"));
        }
        let peak = values.iter().copied().fold(0.0f64, f64::max);
        if values.iter().any(|&v| v < -1e-12 * peak.max(1.0)) {
            return Err(Error::NonPositiveNormalization(
                values.iter().copied().fold(f64::INFINITY, f64::min),
            ));
        }
        for v in values.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let grid: Vec<f64> = (0..n_points).map(|i| lo + i as f64 * h).collect();
        let z = trapezoid(&grid, &values);
        if !(z > 0.0) {
            return Err(Error::NonPositiveNormalization(z));
        }
        for v in values.iter_mut() {
            *v /= z;
        }
        Ok(Self {
            grid,
            values,
            norm_constant: 1.0 / z,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The factor that was applied to the raw values.
    pub fn norm_constant(&self) -> f64 {
        self.norm_constant
    }

    pub fn trapezoid_integral(&self) -> f64 {
        trapezoid(&self.grid, &self.values)
    }
}

fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 1..grid.len() {
        acc += 0.5 * (values[i] + values[i - 1]) * (grid[i] - grid[i - 1]);
    }
    acc
}
