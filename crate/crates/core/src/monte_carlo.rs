//! Simulation of the full measurement process and Haar-unitary machinery.
//!
//! A simulated outcome is produced exactly as the model prescribes: draw the
//! perturbation, diagonalize the perturbed observable, draw an eigenvalue
//! index from the Born weights of the state in the perturbed eigenbasis,
//! and emit that eigenvalue.
//!
//! Reproducibility: the sample index space is pre-partitioned into fixed
//! chunks of [`SAMPLE_CHUNK`] samples; chunk j consumes the stream
//! `(seed, j)`. The partition does not depend on the worker count, and the
//! chunk results are merged in chunk order, so the output vector is
//! bit-identical for every `n_workers`.

use ndarray::Array2;
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::closed_form::Spectrum;
use crate::error::{Error, Result};
use crate::error_model::{
    sample_perturbation_with, sample_traceless_2x2_with, uniform_53, ErrorModel, NormalSource,
    RngStream,
};
use crate::hermitian::{
    eig_hermitian, outcome_probabilities, DensityMatrix, HermitianMatrix,
};

/// Number of samples per RNG stream chunk.
pub const SAMPLE_CHUNK: u64 = 1024;

/// Default histogram bin count for outcome summaries.
pub const DEFAULT_BINS: usize = 200;

/// Default histogram range for an observable with eigenvalues spanning
/// `[min_a, max_a]` under error constant `c1`: four perturbation widths of
/// padding, covering all but ~1e-6 of the mass in the tested regimes.
pub fn default_histogram_range(min_a: f64, max_a: f64, c1: f64) -> (f64, f64) {
    let pad = 4.0 / c1.sqrt();
    (min_a - pad, max_a + pad)
}

/// Everything one simulation run depends on.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub observable: HermitianMatrix,
    pub state: DensityMatrix,
    pub model: ErrorModel,
    pub n_samples: u64,
    pub seed: u64,
    pub n_workers: usize,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.observable.dim() != self.state.dim() {
            return Err(Error::DimensionMismatch {
                left: self.observable.dim(),
                right: self.state.dim(),
            });
        }
        if self.n_samples == 0 {
            return Err(Error::InvalidParameter {
                name: "n_samples",
                value: 0.0,
            });
        }
        if self.n_workers == 0 {
            return Err(Error::InvalidParameter {
                name: "n_workers",
                value: 0.0,
            });
        }
        Ok(())
    }
}

/// Simulate `n_samples` measurement outcomes of the perturbed observable.
///
/// Deterministic given (seed, n_samples); independent of `n_workers`.
pub fn simulate_outcomes(cfg: &SimulationConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let n = cfg.observable.dim();
    run_chunked(cfg.n_samples, cfg.seed, cfg.n_workers, |rng| {
        let b = sample_perturbation_with(n, &cfg.model, rng)?;
        let perturbed = &cfg.observable + &b;
        let decomp = eig_hermitian(&perturbed)?;
        let probs = outcome_probabilities(&cfg.state, &decomp)?;
        let k = draw_categorical(&probs, uniform_53(rng));
        Ok(decomp.eigenvalues[k])
    })
}

/// Sample full eigenvalue vectors of the perturbed observable, ascending,
/// with no state weighting. Backs the joint-law and sum/difference checks.
pub fn sample_spectra(cfg: &SimulationConfig) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    let n = cfg.observable.dim();
    run_chunked(cfg.n_samples, cfg.seed, cfg.n_workers, |rng| {
        let b = sample_perturbation_with(n, &cfg.model, rng)?;
        let perturbed = &cfg.observable + &b;
        Ok(eig_hermitian(&perturbed)?.eigenvalues)
    })
}

/// Simulate outcomes of the two-level fluctuating-field model: observable
/// `diag(a, -a)`, traceless perturbation with isotropic weight
/// `exp(-c |b|^2)`.
///
/// Outcomes follow [`crate::closed_form::pdf2_uniform`] for the maximally
/// mixed state and [`crate::closed_form::Pdf2Mixed`] in general, with the
/// same `c`.
pub fn simulate_outcomes_traceless_2x2(
    a: f64,
    state: &DensityMatrix,
    c: f64,
    n_samples: u64,
    seed: u64,
    n_workers: usize,
) -> Result<Vec<f64>> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidParameter { name: "a", value: a });
    }
    if state.dim() != 2 {
        return Err(Error::DimensionMismatch {
            left: state.dim(),
            right: 2,
        });
    }
    let observable = HermitianMatrix::from_real_diagonal(&[a, -a]);
    run_chunked(n_samples, seed, n_workers.max(1), |rng| {
        let b = sample_traceless_2x2_with(c, rng)?;
        let perturbed = &observable + &b;
        let decomp = eig_hermitian(&perturbed)?;
        let probs = outcome_probabilities(state, &decomp)?;
        let k = draw_categorical(&probs, uniform_53(rng));
        Ok(decomp.eigenvalues[k])
    })
}

/// Inverse-CDF draw from categorical weights with a single uniform variate.
///
/// Weights down to -1e-12 (eigensolver rounding) are clamped to zero and the
/// vector renormalized through the target scaling.
fn draw_categorical(probs: &[f64], u: f64) -> usize {
    let mut total = 0.0;
    for &p in probs {
        total += p.max(0.0);
    }
    let target = u * total;
    let mut acc = 0.0;
    for (k, &p) in probs.iter().enumerate() {
        acc += p.max(0.0);
        if acc >= target {
            return k;
        }
    }
    probs.len() - 1
}

fn run_chunked<T, F>(n_samples: u64, seed: u64, n_workers: usize, per_sample: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
{
    let n_chunks = n_samples.div_ceil(SAMPLE_CHUNK);
    let run_chunk = |j: u64| -> Result<Vec<T>> {
        let lo = j * SAMPLE_CHUNK;
        let hi = ((j + 1) * SAMPLE_CHUNK).min(n_samples);
        let mut rng = RngStream::new(seed, j).rng();
        (lo..hi).map(|_| per_sample(&mut rng)).collect()
    };

    let chunks: Vec<Vec<T>> = if n_workers <= 1 {
        (0..n_chunks).map(run_chunk).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n_workers)
            .build()
            .expect("failed to build worker pool");
        pool.install(|| {
            (0..n_chunks)
                .into_par_iter()
                .map(run_chunk)
                .collect::<Result<_>>()
        })?
    };
    Ok(chunks.into_iter().flatten().collect())
}

/// Fixed-width histogram with left-closed right-open bins; the last bin also
/// includes its right edge. Out-of-range samples count toward `total` only.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    /// Per-bin density `count / (total * width)`; integrates to the in-range
    /// fraction of the samples.
    pub fn density(&self) -> Vec<f64> {
        self.counts
            .iter()
            .zip(self.edges.windows(2))
            .map(|(&c, e)| c as f64 / (self.total as f64 * (e[1] - e[0])))
            .collect()
    }
}

pub fn histogram(samples: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::InvalidParameter {
            name: "bins",
            value: 0.0,
        });
    }
    if !(lo < hi) {
        return Err(Error::InvalidParameter {
            name: "lo..hi",
            value: hi - lo,
        });
    }
    let width = (hi - lo) / bins as f64;
    let mut edges: Vec<f64> = (0..=bins).map(|i| lo + i as f64 * width).collect();
    edges[bins] = hi;
    let mut counts = vec![0u64; bins];
    for &x in samples {
        if x < lo || x > hi {
            continue;
        }
        // bin i covers [edges[i], edges[i+1]), consistent with the returned
        // edges; the top edge closes the last bin
        let idx = edges.partition_point(|&e| e <= x).min(bins) - 1;
        counts[idx] += 1;
    }
    Ok(Histogram {
        edges,
        counts,
        total: samples.len() as u64,
    })
}

/// Draw one Haar-distributed unitary.
///
/// QR of a complex Ginibre matrix with the R-diagonal phase fix; since the
/// QR factorization with positive real R diagonal is unique, the
/// re-orthogonalized Gram-Schmidt below produces exactly that corrected Q.
pub fn haar_unitary(n: usize, stream: RngStream) -> Array2<Complex64> {
    let mut rng = stream.rng();
    haar_unitary_with(n, &mut rng)
}

pub fn haar_unitary_with(n: usize, rng: &mut ChaCha8Rng) -> Array2<Complex64> {
    let mut normals = NormalSource::new(rng);
    let mut g: Array2<Complex64> = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = Complex64::new(normals.next(), normals.next());
        }
    }
    // modified Gram-Schmidt, two passes per column
    for j in 0..n {
        for _ in 0..2 {
            for k in 0..j {
                let mut proj = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    proj += g[(i, k)].conj() * g[(i, j)];
                }
                for i in 0..n {
                    let corr = proj * g[(i, k)];
                    g[(i, j)] -= corr;
                }
            }
        }
        let norm: f64 = (0..n).map(|i| g[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            g[(i, j)] /= norm;
        }
    }
    g
}

/// Monte Carlo estimate of the Haar average of
/// `exp(2 c1 tr(diag(r) U diag(a) U^dagger))` over n draws.
///
/// Returns (mean, standard error). Requires every exponent `2 c1 r_k a_l`
/// below 20 in magnitude; beyond that the estimator variance makes the
/// result meaningless.
pub fn hciz_mc_estimate(
    r: &[f64],
    a: &Spectrum,
    c1: f64,
    n: u64,
    stream: RngStream,
) -> Result<(f64, f64)> {
    let dim = a.len();
    if r.len() != dim {
        return Err(Error::DimensionMismatch {
            left: r.len(),
            right: dim,
        });
    }
    if !(c1 >= 0.0) || !c1.is_finite() {
        return Err(Error::InvalidParameter {
            name: "c1",
            value: c1,
        });
    }
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: 0.0,
        });
    }
    const GUARD: f64 = 20.0;
    let mut worst = 0.0f64;
    for &rk in r {
        for &al in a.values() {
            worst = worst.max((2.0 * c1 * rk * al).abs());
        }
    }
    if worst > GUARD {
        return Err(Error::ExponentGuard(worst, GUARD));
    }

    let mut rng = stream.rng();
    let mut values = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let u = haar_unitary_with(dim, &mut rng);
        let mut trace = 0.0;
        for k in 0..dim {
            for l in 0..dim {
                trace += r[k] * a.values()[l] * u[(k, l)].norm_sqr();
            }
        }
        values.push((2.0 * c1 * trace).exp());
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        / ((n - 1).max(1) as f64);
    Ok((mean, (var / n as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{pdf2_uniform, Pdf2Mixed};
    use crate::hermitian::bloch_density;
    use crate::stats::{cdf_from_density, ks_statistic, moments};
    use approx::assert_relative_eq;

    fn two_level_config(c1: f64, c2: f64, n_samples: u64, seed: u64) -> SimulationConfig {
        SimulationConfig {
            observable: HermitianMatrix::from_real_diagonal(&[1.0, -1.0]),
            state: DensityMatrix::maximally_mixed(2).unwrap(),
            model: ErrorModel::new(c1, c2).unwrap(),
            n_samples,
            seed,
            n_workers: 1,
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = two_level_config(3.0, 0.0, 10, 1);
        cfg.state = DensityMatrix::maximally_mixed(3).unwrap();
        assert!(cfg.validate().is_err());
        let mut cfg = two_level_config(3.0, 0.0, 0, 1);
        assert!(cfg.validate().is_err());
        cfg.n_samples = 1;
        cfg.n_workers = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn reproducible_and_worker_count_independent() {
        let mut cfg = two_level_config(3.0, 0.5, 3000, 42);
        let a = simulate_outcomes(&cfg).unwrap();
        let b = simulate_outcomes(&cfg).unwrap();
        assert_eq!(a, b);
        cfg.n_workers = 4;
        let c = simulate_outcomes(&cfg).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn zero_error_limit_recovers_ideal_measurement() {
        let cfg = two_level_config(1e8, 0.0, 20_000, 7);
        let samples = simulate_outcomes(&cfg).unwrap();
        let near_plus = samples.iter().filter(|&&x| (x - 1.0).abs() < 0.01).count();
        let near_minus = samples.iter().filter(|&&x| (x + 1.0).abs() < 0.01).count();
        assert_eq!(near_plus + near_minus, samples.len());
        // equal weights within 4 binomial standard errors
        let frac = near_plus as f64 / samples.len() as f64;
        let se = 0.5 / (samples.len() as f64).sqrt();
        assert!((frac - 0.5).abs() < 4.0 * se);
    }

    #[test]
    fn wasserstein_to_ideal_atoms_decreases_with_error_strength() {
        let w1 = |samples: &mut Vec<f64>| -> f64 {
            samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = samples.len();
            samples
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    let q = if (i as f64 + 0.5) / (n as f64) < 0.5 {
                        -1.0
                    } else {
                        1.0
                    };
                    (x - q).abs()
                })
                .sum::<f64>()
                / n as f64
        };
        let mut distances = Vec::new();
        for (level, c1) in [1e2, 1e4, 1e6].into_iter().enumerate() {
            let cfg = two_level_config(c1, 0.0, 10_000, 900 + level as u64);
            let mut samples = simulate_outcomes(&cfg).unwrap();
            distances.push(w1(&mut samples));
        }
        assert!(
            distances[0] > distances[1] && distances[1] > distances[2],
            "w1 distances not decreasing: {distances:?}"
        );
    }

    #[test]
    fn traceless_outcomes_match_sinh_law() {
        let state = DensityMatrix::maximally_mixed(2).unwrap();
        let n = 20_000;
        let samples =
            simulate_outcomes_traceless_2x2(1.0, &state, 3.0, n, 1234, 1).unwrap();
        let cdf = cdf_from_density(
            |x| pdf2_uniform(x, 1.0, 3.0).unwrap(),
            -5.0,
            5.0,
            4096,
        )
        .unwrap();
        let d = ks_statistic(&samples, &cdf).unwrap();
        // alpha = 0.01 critical value at this n is 0.0115
        assert!(d < 0.0130, "ks distance {d}");
    }

    #[test]
    fn traceless_outcomes_match_mixed_law_mass_split() {
        // eigenstate of the observable: eta = 1
        let state = bloch_density([0.0, 0.0, 0.5]).unwrap();
        let n = 100_000u64;
        let samples =
            simulate_outcomes_traceless_2x2(1.0, &state, 3.0, n, 4321, 1).unwrap();
        let below = samples.iter().filter(|&&x| x < 0.0).count() as f64 / n as f64;

        let mixed = Pdf2Mixed::new(1.0, 3.0, 1.0).unwrap();
        let w = mixed.window();
        let expect = crate::quad::normalize_1d(|x| mixed.density(x), -w, 0.0, 1e-9).unwrap();
        let se = (expect * (1.0 - expect) / n as f64).sqrt();
        assert!(
            (below - expect).abs() < 3.0 * se,
            "below = {below}, expect = {expect}"
        );
    }

    #[test]
    fn sum_and_difference_are_uncorrelated_with_gaussian_sum() {
        let (c1, c2) = (3.0, 1.0);
        let cfg = SimulationConfig {
            n_workers: 4,
            ..two_level_config(c1, c2, 100_000, 31)
        };
        let spectra = sample_spectra(&cfg).unwrap();
        let sums: Vec<f64> = spectra.iter().map(|r| r[0] + r[1]).collect();
        let diffs: Vec<f64> = spectra.iter().map(|r| r[1] - r[0]).collect();

        let ms = moments(&sums).unwrap();
        let md = moments(&diffs).unwrap();
        let n = sums.len() as f64;
        let corr: f64 = sums
            .iter()
            .zip(diffs.iter())
            .map(|(s, d)| (s - ms.mean) * (d - md.mean))
            .sum::<f64>()
            / (n * ms.variance.sqrt() * md.variance.sqrt());
        assert!(corr.abs() < 4.0 / n.sqrt(), "corr = {corr}");

        // var(r1 + r2) = 1/(c1 + 2 c2)
        let expect = 1.0 / (c1 + 2.0 * c2);
        assert!(
            (ms.variance - expect).abs() < 3.0 * ms.std_error_variance,
            "var = {}, expect {expect}",
            ms.variance
        );
    }

    #[test]
    fn histogram_basics() {
        let h = histogram(&[0.5], 0.0, 1.0, 1).unwrap();
        assert_eq!(h.counts, vec![1]);
        assert_eq!(h.total, 1);

        let h = histogram(&[-5.0], 0.0, 1.0, 1).unwrap();
        assert_eq!(h.counts, vec![0]);
        assert_eq!(h.total, 1);

        // uniform grid: counts match a direct per-bin count over the edges
        let grid: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
        let h = histogram(&grid, 0.0, 1.0, 10).unwrap();
        for (i, &c) in h.counts.iter().enumerate() {
            let direct = grid
                .iter()
                .filter(|&&x| {
                    x >= h.edges[i] && (x < h.edges[i + 1] || (i == 9 && x <= h.edges[10]))
                })
                .count() as u64;
            assert_eq!(c, direct, "bin {i}");
        }
        assert_eq!(h.counts.iter().sum::<u64>(), 1000);

        // exactly representable edges give exactly even counts
        let grid: Vec<f64> = (0..1024).map(|i| i as f64 / 1024.0).collect();
        let h = histogram(&grid, 0.0, 1.0, 8).unwrap();
        assert!(h.counts.iter().all(|&c| c == 128));

        // right edge closed
        let h = histogram(&[1.0], 0.0, 1.0, 4).unwrap();
        assert_eq!(h.counts, vec![0, 0, 0, 1]);
    }

    #[test]
    fn histogram_density_integrates_to_coverage() {
        let samples = vec![0.1, 0.2, 0.3, 0.9, 5.0];
        let h = histogram(&samples, 0.0, 1.0, 5).unwrap();
        let total: f64 = h
            .density()
            .iter()
            .zip(h.edges.windows(2))
            .map(|(d, e)| d * (e[1] - e[0]))
            .sum();
        assert_relative_eq!(total, 0.8, epsilon = 1e-12);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        for n in [1, 2, 3, 5] {
            let u = haar_unitary(n, RngStream::new(5, n as u64));
            let udag = u.t().mapv(|z| z.conj());
            let prod = udag.dot(&u);
            let mut err = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    err += (prod[(i, j)] - Complex64::new(expect, 0.0)).norm_sqr();
                }
            }
            assert!(err.sqrt() < 1e-12, "n = {n}: unitarity error {}", err.sqrt());
        }
    }

    #[test]
    fn haar_n1_phase_is_uniform() {
        let n = 10_000;
        let mut mean = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let u = haar_unitary(1, RngStream::new(6, i));
            assert_relative_eq!(u[(0, 0)].norm(), 1.0, epsilon = 1e-12);
            mean += u[(0, 0)];
        }
        mean /= n as f64;
        assert!(mean.norm() < 4.0 / (n as f64).sqrt());
    }

    #[test]
    fn haar_first_entry_modulus_squared_averages_inverse_n() {
        let dim = 3;
        let n = 10_000;
        let mut acc = 0.0;
        let mut rng = RngStream::new(8, 0).rng();
        for _ in 0..n {
            let u = haar_unitary_with(dim, &mut rng);
            acc += u[(0, 0)].norm_sqr();
        }
        let mean = acc / n as f64;
        // |U11|^2 is Beta(1, N-1): variance (N-1)/(N^2 (N+1))
        let se = ((dim as f64 - 1.0) / ((dim * dim) as f64 * (dim as f64 + 1.0)) / n as f64).sqrt();
        assert!((mean - 1.0 / dim as f64).abs() < 3.0 * se, "mean = {mean}");
    }

    #[test]
    fn hciz_zero_coupling_is_exactly_one() {
        let a = Spectrum::new(vec![1.0, -1.0]).unwrap();
        let (mean, se) = hciz_mc_estimate(&[0.3, -0.4], &a, 0.0, 1000, RngStream::new(9, 0)).unwrap();
        assert_eq!(mean, 1.0);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn hciz_exponent_guard() {
        let a = Spectrum::new(vec![30.0, -30.0]).unwrap();
        assert!(matches!(
            hciz_mc_estimate(&[1.0, -1.0], &a, 1.0, 100, RngStream::new(9, 1)),
            Err(Error::ExponentGuard(_, _))
        ));
    }

    #[test]
    fn hciz_invariant_under_spectrum_relabeling() {
        let c1 = 0.5;
        let n = 30_000;
        let a1 = Spectrum::new(vec![1.0, -1.0]).unwrap();
        let a2 = Spectrum::new(vec![-1.0, 1.0]).unwrap();
        let r = [0.5, -0.5];
        let (m1, s1) = hciz_mc_estimate(&r, &a1, c1, n, RngStream::new(10, 0)).unwrap();
        let (m2, s2) = hciz_mc_estimate(&r, &a2, c1, n, RngStream::new(10, 1)).unwrap();
        assert!((m1 - m2).abs() < 3.0 * (s1 * s1 + s2 * s2).sqrt());
    }

    #[test]
    fn hciz_ratio_to_determinant_form_is_instance_independent() {
        let c1 = 0.5;
        let n = 30_000;
        let detform = |
            r: &[f64], a: &Spectrum| -> f64 {
            let t = 2.0 * c1;
            let m00 = (t * r[0] * a.values()[0]).exp();
            let m01 = (t * r[0] * a.values()[1]).exp();
            let m10 = (t * r[1] * a.values()[0]).exp();
            let m11 = (t * r[1] * a.values()[1]).exp();
            (m00 * m11 - m01 * m10)
                / ((r[0] - r[1]) * (a.values()[0] - a.values()[1]))
        };
        let inst: [(Vec<f64>, Vec<f64>); 2] = [
            (vec![0.5, -0.5], vec![1.0, -1.0]),
            (vec![0.8, -0.2], vec![0.7, -0.7]),
        ];
        let mut ks = Vec::new();
        for (i, (r, a)) in inst.iter().enumerate() {
            let a = Spectrum::new(a.clone()).unwrap();
            let (mean, se) = hciz_mc_estimate(r, &a, c1, n, RngStream::new(11, i as u64)).unwrap();
            let df = detform(r, &a);
            ks.push((mean / df, se / df.abs()));
        }
        let gap = (ks[0].0 - ks[1].0).abs();
        let bound = 3.0 * (ks[0].1 * ks[0].1 + ks[1].1 * ks[1].1).sqrt();
        assert!(gap < bound, "constants differ: {ks:?}");
        // for 2x2 the constant is known exactly: 1/(2 c1)
        assert!((ks[0].0 - 1.0).abs() < 3.0 * ks[0].1);
    }
}
