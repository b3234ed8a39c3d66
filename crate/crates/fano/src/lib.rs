//! File formats, parallel sweeps and the `fano` command line on top of
//! [`fano_core`].

pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod sweep;

pub use error::{Error, Result};
pub use fano_core;
