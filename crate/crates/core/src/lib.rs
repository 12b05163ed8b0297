//! Stain unmixing for Papanicolaou-stained RGB cytology images.
//!
//! Estimates per-pixel abundances of eosin Y (EY), hematoxylin (H), light
//! green (LG) and orange G (OG) from three-channel optical density by solving
//!
//! ```text
//! min ½‖AX − Y‖² + λ‖W ⊙ X‖₁ + λ_TV‖HX‖₁   s.t. X ≥ 0
//! ```
//!
//! with ADMM, where `W` carries the nucleus sparsity weights `exp(−x_H)` on
//! the hematoxylin row and `H` is the periodic finite-difference operator.
//! The surrounding pipeline covers optical density conversion, spectral to
//! sRGB rendering, stain-matrix estimation, overdetermined multispectral
//! unmixing, calibration, evaluation metrics, patch statistics and a seeded
//! phantom generator used for benchmarking.
//!
//! The crate is `no_std` and only needs `alloc`. File formats and the command
//! line live in the `papsmix` companion crate.

#![no_std]
#![warn(missing_debug_implementations)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod calib;
pub mod color;
pub mod cube;
mod error;
pub mod fft;
pub mod field;
pub mod linalg;
pub mod metrics;
pub mod od;
pub mod phantom;
pub mod solver;
pub mod stain;

pub use cube::{Grid, IncidentLight, Role, SpectralCube};
pub use error::{Error, Result};
pub use field::AbundanceField;
pub use stain::{Dye, StainMatrix};
