//! Deviation bounds for the spectra of noisy matrices and random graphs.
//!
//! Given a reference matrix whose eigenvalues (or singular values) inside
//! a spectral window are known, and a noisy observation of it, this crate
//! computes per-pair two-sided deviation bounds with explicit probability
//! floors, sharper than the uniform spectral-norm bound for well-separated
//! signal values. The machinery is organized as:
//!
//! - [`models`]: independent-edge random graphs (block models, dot-product
//!   models) and the Gaussian spike matrix model, with reproducible
//!   stream-split sampling;
//! - [`spectral`]: dense symmetric eigensolves, singular values, the
//!   Hermitian dilation, and window localization;
//! - [`concentration`]: bilinear tail profiles, their dilation arithmetic,
//!   and the epsilon-net spectral-norm tail with explicit constants;
//! - [`kato_temple`]: the bound engine assembling per-pair deviation
//!   bounds and window selection;
//! - [`coverage`]: Monte Carlo validation of the bounds on block models;
//! - [`inference`]: two applications, a three-block hypothesis test with
//!   confidence-interval separation thresholds and change-point detection
//!   on graph sequences.
//!
//! The `katobound` binary exposes the same workflows on the command line.

pub mod concentration;
pub mod coverage;
pub mod error;
pub mod inference;
pub mod kato_temple;
pub mod models;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
