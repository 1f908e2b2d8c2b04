//! Allocation-only core of the stress monitoring assistant.
//!
//! Everything here is pure computation: signal windowing, the residual
//! temporal convolutional network with hand-written backward passes, Adam,
//! cross-validation fold plans, classification metrics and the e-coaching
//! risk matrix. File formats, reporting and the command line live in the
//! `sma` companion crate.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod experiment;
pub mod folds;
pub mod gradcheck;
pub mod metrics;
pub mod model;
pub mod nn;
pub mod risk;
pub mod scalar;
pub mod signal;
pub mod synthetic;
pub mod tensor;

pub use error::{Error, Result};
pub use scalar::Real;
pub use tensor::{Matrix, Tensor3};
