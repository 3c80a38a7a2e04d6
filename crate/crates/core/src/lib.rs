//! Tag-based encoding (TBE) physical-layer security for a massive-MIMO UAV
//! downlink.
//!
//! The crate covers the whole chain: UAV geometry and Rician channels with
//! zero-forcing precoding and null-space artificial noise ([`channel`]), the
//! transmit-side protocol ([`tbe`]), the legitimate receiver ([`receiver`]),
//! the eavesdropper ([`adversary`]), closed-form performance metrics
//! ([`theory`]), the power-allocation solvers ([`optimize`]) and a seeded
//! Monte Carlo harness ([`simkit`]).

// NaN-rejecting range checks are written as `!(x > 0.0)` on purpose, and the
// numeric kernels index several parallel arrays by slot.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod adversary;
pub mod channel;
pub mod config;
pub mod error;
pub mod optimize;
pub mod receiver;
pub mod simkit;
pub mod tbe;
pub mod theory;

pub use config::{AnNormalization, PathLossConvention, SystemConfig};
pub use error::{Error, Result};
pub use theory::PowerAllocation;

pub type C64 = num_complex::Complex64;
