//! Data loading, checkpoints, configuration, reporting and orchestration
//! for the stress monitoring assistant. The numerical work lives in
//! `sma-core`.

pub mod checkpoint;
pub mod config;
pub mod error;
pub mod io;
pub mod report;
pub mod runner;

pub use error::{Result, SmaError};
