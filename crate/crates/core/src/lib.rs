//! Low-rank tensor compression of intelligent-surface phase-shift feedback.
//!
//! The phase-shift vector of an `N`-element reflecting surface is reshaped into a
//! `P`-way tensor, fitted with a PARAFAC (ALS) or Tucker (HOSVD) model, and only the
//! quantized factor phases and weights are fed back to the surface controller. The
//! controller rebuilds the vector from the factors and projects it to unit modulus.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the Monte-Carlo
//! harness and the CLI live in the `irsfac-sim` companion crate.
//!
//! Module map:
//! - [`tensor`]: dense complex tensors, unfoldings, Kronecker and Khatri-Rao kernels.
//! - [`linalg`]: one-sided Jacobi SVD, pseudo-inverse, dominant singular triplet.
//! - [`decomposition`]: PARAFAC ALS and truncated HOSVD fits with NMSE tracking.
//! - [`quantization`]: phase and amplitude codebooks and nearest-codeword quantizers.
//! - [`reconstruction`]: controller-side rebuild of the phase-shift vector.
//! - [`channel`]: Rician TX-surface / surface-RX channels with planar-array LOS.
//! - [`system`]: beamformers, feedback durations, rate, SE/EE and the feedback codec.
//! - [`pipeline`]: end-to-end compress → encode → decode → rebuild for one vector.
#![cfg_attr(not(feature = "std"), no_std)]
// NaN must fail the parameter checks, so `!(x > 0.0)` is deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod channel;
pub mod decomposition;
mod error;
pub mod linalg;
pub mod pipeline;
pub mod quantization;
pub mod reconstruction;
pub mod system;
pub mod tensor;

pub use error::{CodecError, Error, Result};
pub use num_complex::Complex64 as C64;
