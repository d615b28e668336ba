//! Experiments, dataset IO, CSV/SVG output and the command-line driver built
//! on [`vradam_core`].

pub mod battery;
pub mod cli;
pub mod config;
pub mod data;
mod error;
pub mod experiments;
pub mod output;
pub mod svg;

pub use error::{Error, Result};
