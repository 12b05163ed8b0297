//! File formats, staged output and the command line of `papsmix`.
//!
//! The numerical work lives in [`papsmix_core`]; this crate reads and writes
//! `.msc` cubes, PNGs, CSV tables and JSON configurations, and drives the
//! core from the `papsmix` binary.

pub mod cli;
pub mod commands;
pub mod cube_io;
pub mod error;
pub mod output;
pub mod raster;
pub mod tables;

pub use cube_io::{load_cube, read_msc};
pub use error::{Error, Result};
