//! Std side of qlsp: configuration, phase caching, CSV and phase file formats,
//! the experiment drivers and the resource sweeps.

pub mod cache;
pub mod config;
pub mod error;
pub mod experiments;
pub mod formats;
pub mod scaling;

pub use error::{CliError, Result};
