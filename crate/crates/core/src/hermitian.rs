//! Dense Hermitian matrices, their eigendecomposition, and density matrices.
//!
//! Everything here is sized for the small dimensions (N up to ~100) that the
//! perturbed-measurement model operates in. The eigensolver is a cyclic
//! complex Jacobi iteration: self-contained, unconditionally convergent for
//! Hermitian input, and deterministic, which the reproducibility contract of
//! the simulation layer relies on.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute tolerance for the hermiticity check at construction.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Off-diagonal Frobenius norm threshold of the Jacobi sweep, relative to the
/// Frobenius norm of the input.
const JACOBI_TOL: f64 = 1e-13;

/// Maximum number of cyclic Jacobi sweeps before giving up.
const JACOBI_MAX_SWEEPS: usize = 100;

/// A dense N x N complex Hermitian matrix.
///
/// Construction checks hermiticity to within [`HERMITICITY_TOL`] and then
/// symmetrizes exactly, `H <- (H + H^dagger)/2`, so downstream code can rely
/// on `H[i][j] == conj(H[j][i])` holding bit-for-bit and on a real diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    data: Array2<Complex64>,
}

impl HermitianMatrix {
    pub fn new(data: Array2<Complex64>) -> Result<Self> {
        let (rows, cols) = data.dim();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(Error::EmptyMatrix);
        }
        let mut worst = 0.0f64;
        for i in 0..rows {
            for j in i..rows {
                let dev = (data[(i, j)] - data[(j, i)].conj()).norm();
                if !(dev <= HERMITICITY_TOL) {
                    worst = worst.max(dev);
                }
            }
        }
        if worst > 0.0 || !data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NotHermitian(worst));
        }
        Ok(Self::symmetrized(data))
    }

    /// Symmetrize without the tolerance check. Internal constructors that
    /// build exactly Hermitian data go through here.
    pub(crate) fn symmetrized(data: Array2<Complex64>) -> Self {
        let n = data.nrows();
        let mut out = data;
        for i in 0..n {
            out[(i, i)] = Complex64::new(out[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let avg = 0.5 * (out[(i, j)] + out[(j, i)].conj());
                out[(i, j)] = avg;
                out[(j, i)] = avg.conj();
            }
        }
        Self { data: out }
    }

    /// Real diagonal matrix `diag(values)`.
    pub fn from_real_diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut data = Array2::zeros((n, n));
        for (i, &v) in values.iter().enumerate() {
            data[(i, i)] = Complex64::new(v, 0.0);
        }
        Self { data }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            data: Array2::zeros((n, n)),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    /// Trace; real because the diagonal is real after symmetrization.
    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.data[(i, i)].re).sum()
    }

    /// `tr(H^2) = sum_ij |H[i][j]|^2` for Hermitian H.
    pub fn trace_of_square(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.trace_of_square().sqrt()
    }

    /// Conjugation `U H U^dagger` by an arbitrary complex matrix, re-symmetrized.
    pub fn conjugate_by(&self, u: &Array2<Complex64>) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: u.nrows(),
                right: self.dim(),
            });
        }
        let uh = u.dot(&self.data);
        let udag = u.t().mapv(|z| z.conj());
        Ok(Self::symmetrized(uh.dot(&udag)))
    }
}

impl std::ops::Add<&HermitianMatrix> for &HermitianMatrix {
    type Output = HermitianMatrix;

    /// Entrywise sum; the sum of Hermitian matrices is Hermitian exactly.
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in matrix sum");
        HermitianMatrix {
            data: &self.data + &rhs.data,
        }
    }
}

/// Eigenvalues (ascending) and the unitary whose columns are eigenvectors.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub unitary: Array2<Complex64>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Rebuild `U diag(lambda) U^dagger`; used by the reconstruction tests.
    pub fn reconstruct(&self) -> Array2<Complex64> {
        let n = self.dim();
        let mut scaled = self.unitary.clone();
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            for i in 0..n {
                scaled[(i, k)] *= lam;
            }
        }
        let udag = self.unitary.t().mapv(|z| z.conj());
        scaled.dot(&udag)
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Sweeps run until the off-diagonal Frobenius norm drops below
/// `1e-13 * ||H||_F`, up to 100 sweeps. Eigenvalues are returned ascending
/// with a stable tie-break on the pre-sort order.
pub fn eig_hermitian(h: &HermitianMatrix) -> Result<SpectralDecomposition> {
    let n = h.dim();
    let mut a = h.entries().clone();
    let mut v: Array2<Complex64> = Array2::eye(n);

    let norm = h.frobenius_norm();
    let threshold_sq = (JACOBI_TOL * norm) * (JACOBI_TOL * norm);

    let mut converged = off_diagonal_sq(&a) <= threshold_sq;
    let mut sweeps = 0;
    while !converged {
        if sweeps >= JACOBI_MAX_SWEEPS {
            return Err(Error::EigenSolverDidNotConverge {
                sweeps: JACOBI_MAX_SWEEPS,
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
        converged = off_diagonal_sq(&a) <= threshold_sq;
    }

    let mut order: Vec<usize> = (0..n).collect();
    // sort_by is stable, so ties keep the Jacobi output order
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());

    let eigenvalues: Vec<f64> = order.iter().map(|&k| a[(k, k)].re).collect();
    let mut unitary = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            unitary[(i, dst)] = v[(i, src)];
        }
    }

    Ok(SpectralDecomposition {
        eigenvalues,
        unitary,
    })
}

fn off_diagonal_sq(a: &Array2<Complex64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s
}

/// One Jacobi rotation annihilating the (p, q) entry.
///
/// With `alpha = A[p][q] = |alpha| e^{i phi}` the rotation is the unitary
/// that acts on the (p, q) plane as `[[c, -s e^{i phi}], [s e^{-i phi}, c]]`,
/// where `t = s/c` solves `t^2 - 2 tau t - 1 = 0`, `tau = (A[q][q] - A[p][p]) / (2|alpha|)`.
fn rotate(a: &mut Array2<Complex64>, v: &mut Array2<Complex64>, p: usize, q: usize) {
    let alpha = a[(p, q)];
    let abs = alpha.norm();
    if abs == 0.0 {
        return;
    }
    let phase = alpha / abs;

    let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * abs);
    // smaller-magnitude root of t^2 - 2 tau t - 1 = 0 keeps the angle below pi/4
    let root = (1.0 + tau * tau).sqrt();
    let t = if tau >= 0.0 {
        -1.0 / (tau + root)
    } else {
        1.0 / (root - tau)
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let n = a.nrows();
    let spin = s * phase; // s e^{i phi}
    let spin_conj = spin.conj();

    // columns p and q of A
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp + spin_conj * akq;
        a[(k, q)] = -spin * akp + c * akq;
    }
    // rows p and q of A (conjugate rotation from the left)
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk + spin * aqk;
        a[(q, k)] = -spin_conj * apk + c * aqk;
    }
    // clean up rounding on the pivot pair
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    // accumulate eigenvectors: V <- V J
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp + spin_conj * vkq;
        v[(k, q)] = -spin * vkp + c * vkq;
    }
}

/// Vandermonde product `prod_{k<l} (values[k] - values[l])`.
///
/// Evaluated over the sorted sequence with a parity correction so that the
/// result is exactly antisymmetric under entry swaps: the factor multiset is
/// canonical and only the sign tracks the input order. Empty and singleton
/// input give 1 (empty product).
pub fn vandermonde(values: &[f64]) -> f64 {
    let n = values.len();
    if n <= 1 {
        return 1.0;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());

    // parity of the sorting permutation via cycle count
    let mut seen = vec![false; n];
    let mut transpositions = 0usize;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut len = 0usize;
        let mut k = start;
        while !seen[k] {
            seen[k] = true;
            k = order[k];
            len += 1;
        }
        transpositions += len - 1;
    }
    let sign = if transpositions.is_multiple_of(2) { 1.0 } else { -1.0 };

    let mut prod = 1.0;
    for k in 0..n {
        for l in (k + 1)..n {
            prod *= values[order[k]] - values[order[l]];
        }
    }
    sign * prod
}

/// A positive semidefinite Hermitian matrix with unit trace.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: HermitianMatrix,
}

impl DensityMatrix {
    /// Validates `tr = 1` within 1e-12 and all eigenvalues >= -1e-12.
    pub fn from_hermitian(matrix: HermitianMatrix) -> Result<Self> {
        let tr = matrix.trace();
        if (tr - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidTrace(tr));
        }
        let decomp = eig_hermitian(&matrix)?;
        let min = decomp.eigenvalues[0];
        if min < -1e-12 {
            return Err(Error::NotPositiveSemidefinite(min));
        }
        Ok(Self { matrix })
    }

    /// The maximally mixed state `I/n`.
    pub fn maximally_mixed(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        let mut data = Array2::zeros((n, n));
        let w = Complex64::new(1.0 / n as f64, 0.0);
        for i in 0..n {
            data[(i, i)] = w;
        }
        Ok(Self {
            matrix: HermitianMatrix::symmetrized(data),
        })
    }

    /// The pure state `|psi><psi|` for a normalized state vector.
    pub fn pure_state(psi: &[Complex64]) -> Result<Self> {
        let n = psi.len();
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        let norm_sq: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidTrace(norm_sq));
        }
        let mut data = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                data[(i, j)] = psi[i] * psi[j].conj();
            }
        }
        Ok(Self {
            matrix: HermitianMatrix::symmetrized(data),
        })
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `tr(rho A)`, the state average of an observable.
    pub fn expectation(&self, observable: &HermitianMatrix) -> Result<f64> {
        if observable.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: observable.dim(),
                right: self.dim(),
            });
        }
        let prod = self.matrix.entries().dot(observable.entries());
        Ok((0..self.dim()).map(|i| prod[(i, i)].re).sum())
    }
}

/// 2x2 density matrix in Bloch form, `rho = I/2 + sigma . rho_vec`.
///
/// Requires `|rho_vec| <= 1/2` (within 1e-12): outside that ball the matrix
/// is no longer positive.
pub fn bloch_density(rho_vec: [f64; 3]) -> Result<DensityMatrix> {
    let [x, y, z] = rho_vec;
    let norm = (x * x + y * y + z * z).sqrt();
    if !(norm <= 0.5 + 1e-12) {
        return Err(Error::BlochVectorTooLong(norm));
    }
    let mut data = Array2::zeros((2, 2));
    data[(0, 0)] = Complex64::new(0.5 + z, 0.0);
    data[(0, 1)] = Complex64::new(x, -y);
    data[(1, 0)] = Complex64::new(x, y);
    data[(1, 1)] = Complex64::new(0.5 - z, 0.0);
    // construction is exactly Hermitian with trace 1; PSD is the norm bound
    Ok(DensityMatrix {
        matrix: HermitianMatrix::symmetrized(data),
    })
}

/// Born weights of the eigenbasis: entry k is `<u_k| rho |u_k>`, i.e.
/// `diag(U^dagger rho U)`.
pub fn outcome_probabilities(
    rho: &DensityMatrix,
    decomp: &SpectralDecomposition,
) -> Result<Vec<f64>> {
    let n = decomp.dim();
    if rho.dim() != n {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: n,
        });
    }
    let rho_u = rho.matrix().entries().dot(&decomp.unitary);
    let mut probs = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            acc += decomp.unitary[(i, k)].conj() * rho_u[(i, k)];
        }
        probs.push(acc.re);
    }
    debug_assert!(
        (probs.iter().sum::<f64>() - 1.0).abs() < 1e-10,
        "born weights should sum to 1"
    );
    Ok(probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::RngCore;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn test_rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn uniform(rng: &mut impl RngCore) -> f64 {
        (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub(crate) fn random_hermitian(n: usize, rng: &mut impl RngCore) -> HermitianMatrix {
        let mut data = Array2::zeros((n, n));
        for i in 0..n {
            data[(i, i)] = Complex64::new(2.0 * uniform(rng) - 1.0, 0.0);
            for j in (i + 1)..n {
                let z = Complex64::new(2.0 * uniform(rng) - 1.0, 2.0 * uniform(rng) - 1.0);
                data[(i, j)] = z;
                data[(j, i)] = z.conj();
            }
        }
        HermitianMatrix::new(data).unwrap()
    }

    #[test]
    fn construction_rejects_non_hermitian() {
        let mut data: Array2<Complex64> = Array2::zeros((2, 2));
        data[(0, 1)] = Complex64::new(1.0, 0.0);
        data[(1, 0)] = Complex64::new(0.5, 0.0);
        assert!(matches!(
            HermitianMatrix::new(data),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn construction_rejects_non_finite() {
        let mut data: Array2<Complex64> = Array2::zeros((2, 2));
        data[(0, 0)] = Complex64::new(f64::NAN, 0.0);
        assert!(HermitianMatrix::new(data).is_err());
    }

    #[test]
    fn construction_symmetrizes_exactly() {
        let mut data: Array2<Complex64> = Array2::zeros((2, 2));
        data[(0, 1)] = Complex64::new(1.0, 0.5e-12);
        data[(1, 0)] = Complex64::new(1.0, 0.0);
        let h = HermitianMatrix::new(data).unwrap();
        assert_eq!(h.get(0, 1), h.get(1, 0).conj());
    }

    #[test]
    fn eig_diagonal_is_trivial() {
        let h = HermitianMatrix::from_real_diagonal(&[1.0, -1.0]);
        let d = eig_hermitian(&h).unwrap();
        assert_eq!(d.eigenvalues, vec![-1.0, 1.0]);
        // unitary is a permutation of the identity
        for k in 0..2 {
            let col: Vec<f64> = (0..2).map(|i| d.unitary[(i, k)].norm()).collect();
            assert!(col.iter().any(|&v| (v - 1.0).abs() < 1e-14));
        }
    }

    #[test]
    fn eig_pauli_x() {
        let mut data: Array2<Complex64> = Array2::zeros((2, 2));
        data[(0, 1)] = Complex64::new(1.0, 0.0);
        data[(1, 0)] = Complex64::new(1.0, 0.0);
        let h = HermitianMatrix::new(data).unwrap();
        let d = eig_hermitian(&h).unwrap();
        assert_relative_eq!(d.eigenvalues[0], -1.0, epsilon = 1e-14);
        assert_relative_eq!(d.eigenvalues[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn eig_zero_matrix() {
        let h = HermitianMatrix::zeros(3);
        let d = eig_hermitian(&h).unwrap();
        assert_eq!(d.eigenvalues, vec![0.0; 3]);
    }

    fn reconstruction_error(h: &HermitianMatrix, d: &SpectralDecomposition) -> f64 {
        let rec = d.reconstruct();
        let diff: f64 = rec
            .iter()
            .zip(h.entries().iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        diff / h.frobenius_norm().max(f64::MIN_POSITIVE)
    }

    fn unitarity_error(u: &Array2<Complex64>) -> f64 {
        let n = u.nrows();
        let udag = u.t().mapv(|z| z.conj());
        let prod = udag.dot(u);
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let expected = if i == j { 1.0 } else { 0.0 };
                s += (prod[(i, j)] - Complex64::new(expected, 0.0)).norm_sqr();
            }
        }
        s.sqrt()
    }

    #[test]
    fn eig_random_5x5_reconstructs() {
        let mut rng = test_rng(42);
        let h = random_hermitian(5, &mut rng);
        let d = eig_hermitian(&h).unwrap();
        assert!(reconstruction_error(&h, &d) < 1e-9);
        assert!(unitarity_error(&d.unitary) < 1e-10);
        for w in d.eigenvalues.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn eig_reconstruction_sweep_n2_to_n8() {
        let mut rng = test_rng(7);
        for n in 2..=8 {
            for _ in 0..20 {
                let h = random_hermitian(n, &mut rng);
                let d = eig_hermitian(&h).unwrap();
                assert!(
                    reconstruction_error(&h, &d) < 1e-9,
                    "reconstruction failed at n = {n}"
                );
                assert!(unitarity_error(&d.unitary) < 1e-10);
            }
        }
    }

    #[test]
    fn eig_deterministic_for_identical_input() {
        let mut rng = test_rng(3);
        let h = random_hermitian(6, &mut rng);
        let d1 = eig_hermitian(&h).unwrap();
        let d2 = eig_hermitian(&h).unwrap();
        assert_eq!(d1.eigenvalues, d2.eigenvalues);
        assert_eq!(d1.unitary, d2.unitary);
    }

    #[test]
    fn eig_traceless_2x2_eigenvalues_are_plus_minus_norm() {
        let mut rng = test_rng(11);
        for _ in 0..50 {
            let (bx, by, bz) = (
                2.0 * uniform(&mut rng) - 1.0,
                2.0 * uniform(&mut rng) - 1.0,
                2.0 * uniform(&mut rng) - 1.0,
            );
            let mut data: Array2<Complex64> = Array2::zeros((2, 2));
            data[(0, 0)] = Complex64::new(bz, 0.0);
            data[(1, 1)] = Complex64::new(-bz, 0.0);
            data[(0, 1)] = Complex64::new(bx, -by);
            data[(1, 0)] = Complex64::new(bx, by);
            let h = HermitianMatrix::new(data).unwrap();
            let r = (bx * bx + by * by + bz * bz).sqrt();
            let d = eig_hermitian(&h).unwrap();
            assert!((d.eigenvalues[0] + r).abs() <= 1e-12);
            assert!((d.eigenvalues[1] - r).abs() <= 1e-12);
        }
    }

    /// Independent oracle for N=3: roots of the characteristic polynomial
    /// lambda^3 - tr lambda^2 + m2 lambda - det, solved in closed form.
    fn charpoly_roots_3x3(h: &HermitianMatrix) -> [f64; 3] {
        let a = h.entries();
        let tr = h.trace();
        let det = {
            let m = |i: usize, j: usize| a[(i, j)];
            (m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
                - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
                + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0)))
                .re
        };
        let mut m2 = 0.0;
        for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
            m2 += (a[(i, i)] * a[(j, j)] - a[(i, j)] * a[(j, i)]).re;
        }
        // depressed cubic t^3 + p t + q with lambda = t + tr/3
        let p = m2 - tr * tr / 3.0;
        let q = -2.0 * tr * tr * tr / 27.0 + tr * m2 / 3.0 - det;
        // three real roots: trigonometric form
        let amp = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (amp * p)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let mut roots = [
            amp * theta.cos() + tr / 3.0,
            amp * (theta - 2.0 * std::f64::consts::PI / 3.0).cos() + tr / 3.0,
            amp * (theta - 4.0 * std::f64::consts::PI / 3.0).cos() + tr / 3.0,
        ];
        roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
        roots
    }

    #[test]
    fn eig_matches_characteristic_polynomial_n3() {
        let mut rng = test_rng(19);
        for _ in 0..20 {
            let h = random_hermitian(3, &mut rng);
            let d = eig_hermitian(&h).unwrap();
            let roots = charpoly_roots_3x3(&h);
            for (lam, root) in d.eigenvalues.iter().zip(roots.iter()) {
                assert_relative_eq!(lam, root, epsilon = 1e-9, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn vandermonde_basics() {
        assert_eq!(vandermonde(&[2.0, 1.0]), 1.0);
        assert_eq!(vandermonde(&[1.5, 1.5, 3.0]), 0.0);
        assert_eq!(vandermonde(&[3.0, 1.0, 0.0]), 6.0);
        assert_eq!(vandermonde(&[5.0]), 1.0);
        assert_eq!(vandermonde(&[]), 1.0);
    }

    #[test]
    fn vandermonde_swap_flips_sign_exactly() {
        let mut rng = test_rng(23);
        for _ in 0..100 {
            let n = 2 + (rng.next_u64() % 6) as usize;
            let v: Vec<f64> = (0..n).map(|_| 4.0 * uniform(&mut rng) - 2.0).collect();
            let base = vandermonde(&v);
            for i in 0..n {
                for j in (i + 1)..n {
                    let mut w = v.clone();
                    w.swap(i, j);
                    assert_eq!(vandermonde(&w), -base, "swap ({i},{j}) of {v:?}");
                }
            }
        }
    }

    #[test]
    fn bloch_density_cases() {
        let mixed = bloch_density([0.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(mixed.matrix().get(0, 0).re, 0.5, epsilon = 1e-15);
        assert_relative_eq!(mixed.matrix().get(1, 1).re, 0.5, epsilon = 1e-15);

        let up = bloch_density([0.0, 0.0, 0.5]).unwrap();
        assert_relative_eq!(up.matrix().get(0, 0).re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(up.matrix().get(1, 1).re, 0.0, epsilon = 1e-15);

        let plus = bloch_density([0.5, 0.0, 0.0]).unwrap();
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert_relative_eq!(plus.matrix().get(i, j).re, 0.5, epsilon = 1e-15);
        }
        let d = eig_hermitian(plus.matrix()).unwrap();
        assert_relative_eq!(d.eigenvalues[0], 0.0, epsilon = 1e-14);
        assert_relative_eq!(d.eigenvalues[1], 1.0, epsilon = 1e-14);

        assert!(matches!(
            bloch_density([0.0, 0.0, 0.6]),
            Err(Error::BlochVectorTooLong(_))
        ));
    }

    #[test]
    fn density_matrix_validation() {
        let not_unit_trace = HermitianMatrix::from_real_diagonal(&[0.7, 0.7]);
        assert!(matches!(
            DensityMatrix::from_hermitian(not_unit_trace),
            Err(Error::InvalidTrace(_))
        ));
        let not_psd = HermitianMatrix::from_real_diagonal(&[1.5, -0.5]);
        assert!(matches!(
            DensityMatrix::from_hermitian(not_psd),
            Err(Error::NotPositiveSemidefinite(_))
        ));
    }

    #[test]
    fn outcome_probabilities_maximally_mixed() {
        let mut rng = test_rng(31);
        let h = random_hermitian(4, &mut rng);
        let d = eig_hermitian(&h).unwrap();
        let rho = DensityMatrix::maximally_mixed(4).unwrap();
        let p = outcome_probabilities(&rho, &d).unwrap();
        for &w in &p {
            assert_relative_eq!(w, 0.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn outcome_probabilities_eigenstate() {
        let mut rng = test_rng(37);
        let h = random_hermitian(3, &mut rng);
        let d = eig_hermitian(&h).unwrap();
        let u0: Vec<Complex64> = (0..3).map(|i| d.unitary[(i, 0)]).collect();
        let rho = DensityMatrix::pure_state(&u0).unwrap();
        let p = outcome_probabilities(&rho, &d).unwrap();
        assert_relative_eq!(p[0], 1.0, epsilon = 1e-10);
        assert!(p[1].abs() < 1e-10 && p[2].abs() < 1e-10);
    }

    #[test]
    fn outcome_probabilities_match_explicit_loops() {
        let mut rng = test_rng(41);
        let h = random_hermitian(3, &mut rng);
        let d = eig_hermitian(&h).unwrap();
        // random valid density matrix: normalized PSD gram matrix
        let rho = bloch_like_random(3, &mut rng);

        let p = outcome_probabilities(&rho, &d).unwrap();
        for (k, &pk) in p.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..3 {
                for j in 0..3 {
                    acc += d.unitary[(i, k)].conj() * rho.matrix().get(i, j) * d.unitary[(j, k)];
                }
            }
            assert_relative_eq!(pk, acc.re, epsilon = 1e-12);
        }
        assert_relative_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn outcome_probabilities_invariant_under_column_rephasing() {
        let mut rng = test_rng(43);
        let h = random_hermitian(4, &mut rng);
        let d = eig_hermitian(&h).unwrap();
        let rho = bloch_like_random(4, &mut rng);
        let p = outcome_probabilities(&rho, &d).unwrap();

        let mut rephased = d.clone();
        for k in 0..4 {
            let theta = 2.0 * std::f64::consts::PI * uniform(&mut rng);
            let phase = Complex64::new(theta.cos(), theta.sin());
            for i in 0..4 {
                rephased.unitary[(i, k)] *= phase;
            }
        }
        let q = outcome_probabilities(&rho, &rephased).unwrap();
        for (a, b) in p.iter().zip(q.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    fn bloch_like_random(n: usize, rng: &mut impl RngCore) -> DensityMatrix {
        let g = random_hermitian(n, rng);
        let gram = g.entries().dot(&g.entries().t().mapv(|z| z.conj()));
        let tr: f64 = (0..n).map(|i| gram[(i, i)].re).sum();
        DensityMatrix::from_hermitian(HermitianMatrix::symmetrized(gram.mapv(|z| z / tr))).unwrap()
    }

    #[test]
    fn expectation_of_diagonal_observable() {
        let rho = bloch_density([0.0, 0.0, 0.5]).unwrap();
        let a = HermitianMatrix::from_real_diagonal(&[1.0, -1.0]);
        assert_relative_eq!(rho.expectation(&a).unwrap(), 1.0, epsilon = 1e-14);
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        assert_relative_eq!(mixed.expectation(&a).unwrap(), 0.0, epsilon = 1e-14);
    }
}
