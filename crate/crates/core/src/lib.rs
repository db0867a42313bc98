//! Random-matrix model of measurement error for finite-dimensional quantum
//! observables.
//!
//! An ideal measurement of a Hermitian observable returns one of its
//! eigenvalues with Born weights. This crate models a noisy apparatus by
//! adding a Gaussian random Hermitian perturbation to the observable,
//! weighted by `exp(-c1 tr B^2 - c2 (tr B)^2)`, and answers the question:
//! what distribution do the measured values actually follow?
//!
//! Level repulsion between eigenvalues makes the answer markedly
//! non-Gaussian, with a second-order zero between symmetric outcomes and
//! peaks pushed outward from the true eigenvalues. The crate provides
//!
//! - the exact two-level outcome laws ([`closed_form::pdf2_uniform`],
//!   [`closed_form::Pdf2Mixed`]),
//! - the N-level joint eigenvalue law in determinant and permutation-sum
//!   form, its 2x2 sum/difference factorization, and the steepest-descent
//!   single-outcome marginal ([`closed_form`]),
//! - samplers and a full measurement simulation with reproducible parallel
//!   streams ([`error_model`], [`monte_carlo`]),
//! - quadrature, peak finding and sample-vs-density statistics backing the
//!   verification suites ([`quad`], [`stats`], [`verify`]).
//!
//! ```
//! use qmeasure::closed_form::pdf2_uniform;
//! use qmeasure::quad::find_peaks;
//!
//! // two-level observable diag(1, -1), error constant c = 3: the outcome
//! // density peaks outside the true eigenvalues
//! let peaks = find_peaks(|r| pdf2_uniform(r, 1.0, 3.0).unwrap(), 0.0, 3.0, 512)?;
//! assert!((peaks[0].location - 1.1455).abs() < 1e-3);
//! # Ok::<(), qmeasure::Error>(())
//! ```

// parameter guards are written `!(x > 0.0)` so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod error;
pub mod error_model;
pub mod hermitian;
pub mod monte_carlo;
pub mod quad;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use error_model::{ErrorModel, RngStream};
pub use hermitian::{DensityMatrix, HermitianMatrix, SpectralDecomposition};

/// Every code block in the guide (book/) and the README runs as a doctest,
/// keeping the prose in sync with the library.
#[cfg(doctest)]
mod book {
    macro_rules! page {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            pub struct $name;
        };
    }
    page!(Readme, "../../../README.md");
    page!(Introduction, "../../../book/src/introduction.md");
    page!(GettingStarted, "../../../book/src/getting-started.md");
    page!(TwoLevelModel, "../../../book/src/two-level-model.md");
    page!(MixedStates, "../../../book/src/mixed-states.md");
    page!(JointLaw, "../../../book/src/joint-law.md");
    page!(SteepestDescent, "../../../book/src/steepest-descent.md");
    page!(MonteCarlo, "../../../book/src/monte-carlo.md");
    page!(Verification, "../../../book/src/verification.md");
    page!(CliReference, "../../../book/src/cli.md");
}
