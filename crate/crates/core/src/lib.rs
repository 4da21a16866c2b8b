//! Second-order evolution equations with memory
//!
//! ```text
//! u'' + A[αu − ∫₀^ℓ μ(s) u(t − s) ds] = 0
//! ```
//!
//! solved in three equivalent ways: the direct Volterra form driven by a state
//! function F₀, the history form on (u, v, η) and the minimal-state form on
//! (u, v, ξ). A is represented by its eigenvalues.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod gallery;
pub mod history;
pub mod io;
pub mod kernel;
pub mod maps;
pub mod quad;
pub mod scenario;
pub mod spectral;
pub mod stability;
pub mod state;
pub mod tolerances;
pub mod volterra;

pub use error::{Error, Result};
