//! Numerical coorbit-space toolkit: short-time Fourier and wavelet
//! transforms, Bargmann–Fock functions, weighted mixed norms on their
//! coefficient fields, and tightness diagnostics for finite families.

pub mod bargmann;
pub mod error;
pub mod field;
pub mod norms;
pub mod par;
pub mod quad;
pub mod signal;
pub mod stft;
pub mod wavelet;
pub mod region;
pub mod family;
pub mod tightness;
pub mod config;
pub mod benchmarks;
pub mod json;

pub use error::{Error, ErrorClass, Result};
