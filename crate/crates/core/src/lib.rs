//! Gaussian-state simulation of chirality-induced quantum nonreciprocity in
//! two optical channels coupled through a shared atomic spin ensemble.
//!
//! All covariances use shot-noise units (vacuum = identity) and quadrature
//! ordering `X₁, P₁, X₂, P₂, …`. Rates are angular (rad/s) unless a name ends
//! in `_hz`.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chirality;
pub mod dynamics;
pub mod eit;
pub mod error;
pub mod floquet;
pub mod fmt;
pub mod gaussian;
pub mod metrics;
pub mod optimize;
pub mod scenario;

pub use error::{Error, Result};
