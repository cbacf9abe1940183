//! Secrecy performance of frequency diverse array links over fluctuating two-ray fading
//! with finite QAM inputs.
//!
//! The analytic results (closed forms, single-integral outage forms, high-SNR asymptotes) are
//! each paired with a direct quadrature and a Monte Carlo oracle.

// `!(x > 0.0)` style checks also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod fda;
pub mod figures;
pub mod ftr;
pub mod manifest;
pub mod montecarlo;
pub mod numerics;
pub mod qam;
pub mod secrecy;
pub mod sweep;

pub use error::{Error, Result};
