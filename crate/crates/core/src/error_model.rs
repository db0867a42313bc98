//! The Gaussian matrix weight `exp(-c1 tr B^2 - c2 (tr B)^2)`: sampling
//! Hermitian perturbations from it and evaluating its log-density.
//!
//! Reproducibility contract: a sample is a pure function of its
//! [`RngStream`]. Streams with distinct `stream_id` under the same seed are
//! non-overlapping ChaCha streams, so parallel replicas can partition the
//! stream-id space freely without coordination.

use ndarray::Array2;
use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;

/// The pair of constants of the matrix weight `exp(-c1 tr B^2 - c2 (tr B)^2)`.
///
/// `c1 > 0` is required; `c2 >= 0`, with `c2 = 0` the pure-GUE limit. The
/// trace couples only through `c2`: larger `c2` suppresses the common shift
/// of all eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorModel {
    c1: f64,
    c2: f64,
}

impl ErrorModel {
    pub fn new(c1: f64, c2: f64) -> Result<Self> {
        if !(c1 > 0.0) || !(c2 >= 0.0) || !c1.is_finite() || !c2.is_finite() {
            return Err(Error::InvalidModelConstants { c1, c2 });
        }
        Ok(Self { c1, c2 })
    }

    /// Pure GUE weight `exp(-c1 tr B^2)`.
    pub fn gue(c1: f64) -> Result<Self> {
        Self::new(c1, 0.0)
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }
}

/// A (seed, stream_id) pair naming one deterministic random stream.
///
/// Identical pairs always reproduce the identical variate sequence,
/// independent of thread count or platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// The generator positioned at the start of this stream.
    pub fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    pub fn with_stream(self, stream_id: u64) -> Self {
        Self {
            seed: self.seed,
            stream_id,
        }
    }
}

/// Uniform variate on (0, 1] built from the top 53 bits of one u64 draw.
#[inline]
pub(crate) fn uniform_53(rng: &mut impl RngCore) -> f64 {
    (((rng.next_u64() >> 11) + 1) as f64) * (1.0 / 9007199254740992.0)
}

/// Standard-normal source: Box-Muller on 53-bit uniforms, two variates per
/// pair of draws. One instance per sampled object keeps the per-object
/// draw budget fixed.
pub(crate) struct NormalSource<'a, R: RngCore> {
    rng: &'a mut R,
    spare: Option<f64>,
}

impl<'a, R: RngCore> NormalSource<'a, R> {
    pub fn new(rng: &'a mut R) -> Self {
        Self { rng, spare: None }
    }

    pub fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = uniform_53(self.rng);
        let u2 = uniform_53(self.rng);
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }
}

/// Draw one N x N Hermitian matrix from `exp(-c1 tr B^2 - c2 (tr B)^2)`.
///
/// Entry law: real and imaginary parts of each strictly-upper entry are
/// independent centered Gaussians with variance `1/(4 c1)`; the diagonal is
/// a centered Gaussian vector with covariance `(2 c1 I + 2 c2 J)^{-1}`,
/// J the all-ones matrix.
pub fn sample_perturbation(n: usize, model: &ErrorModel, stream: RngStream) -> Result<HermitianMatrix> {
    let mut rng = stream.rng();
    sample_perturbation_with(n, model, &mut rng)
}

/// Same draw, advancing a caller-owned generator. Consumes a fixed number of
/// uniform draws per call: `2 * ceil(n^2 / 2)`.
///
/// Draw order is part of the reproducibility contract: n diagonal normals
/// first, then (re, im) for each strictly-upper entry in row-major order.
pub fn sample_perturbation_with(
    n: usize,
    model: &ErrorModel,
    rng: &mut impl RngCore,
) -> Result<HermitianMatrix> {
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    let mut normals = NormalSource::new(rng);

    // diagonal: iid N(0, 1/(2 c1)), then rescale the all-ones projection to
    // variance 1/(2 (c1 + n c2)). Exact and O(n), no Cholesky needed.
    let sigma_diag = 1.0 / (2.0 * model.c1).sqrt();
    let mut diag: Vec<f64> = (0..n).map(|_| sigma_diag * normals.next()).collect();
    if model.c2 > 0.0 {
        let shrink = (model.c1 / (model.c1 + n as f64 * model.c2)).sqrt();
        let mean = diag.iter().sum::<f64>() / n as f64;
        for d in diag.iter_mut() {
            *d += (shrink - 1.0) * mean;
        }
    }

    let sigma_off = 1.0 / (2.0 * model.c1.sqrt());
    let mut data = Array2::zeros((n, n));
    for (i, &d) in diag.iter().enumerate() {
        data[(i, i)] = Complex64::new(d, 0.0);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let z = Complex64::new(sigma_off * normals.next(), sigma_off * normals.next());
            data[(i, j)] = z;
            data[(j, i)] = z.conj();
        }
    }
    Ok(HermitianMatrix::symmetrized(data))
}

/// Draw a traceless 2x2 perturbation `sigma . b` with isotropic 3-vector
/// weight `exp(-c |b|^2)`, i.e. each component of b is `N(0, 1/(2c))`.
///
/// This is the two-level fluctuating-field model whose measurement outcomes
/// follow the sinh law [`crate::closed_form::pdf2_uniform`] with the same
/// `c`. In the matrix weight family it sits at the `c1 = c/2` slice
/// conditioned on `tr B = 0`, which no finite `c2` reaches.
pub fn sample_traceless_2x2(c: f64, stream: RngStream) -> Result<HermitianMatrix> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter {
            name: "c",
            value: c,
        });
    }
    let mut rng = stream.rng();
    sample_traceless_2x2_with(c, &mut rng)
}

pub fn sample_traceless_2x2_with(c: f64, rng: &mut impl RngCore) -> Result<HermitianMatrix> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter {
            name: "c",
            value: c,
        });
    }
    let mut normals = NormalSource::new(rng);
    let sigma = 1.0 / (2.0 * c).sqrt();
    let (bx, by, bz) = (
        sigma * normals.next(),
        sigma * normals.next(),
        sigma * normals.next(),
    );
    let mut data = Array2::zeros((2, 2));
    data[(0, 0)] = Complex64::new(bz, 0.0);
    data[(1, 1)] = Complex64::new(-bz, 0.0);
    data[(0, 1)] = Complex64::new(bx, -by);
    data[(1, 0)] = Complex64::new(bx, by);
    Ok(HermitianMatrix::symmetrized(data))
}

/// Unnormalized log-density `-c1 tr B^2 - c2 (tr B)^2`.
///
/// The normalization constant is deliberately omitted; every consumer either
/// works with ratios or normalizes numerically.
pub fn log_density(b: &HermitianMatrix, model: &ErrorModel) -> f64 {
    let tr = b.trace();
    -model.c1 * b.trace_of_square() - model.c2 * tr * tr
}
