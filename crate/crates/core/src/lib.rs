//! Reconstruction of dense 2D signal maps from sparse, partially corrupted
//! point samples.
//!
//! The reconstructor matches a library of disk-supported patterns against the
//! observed samples: for every pattern and anchor it scores reliability minus
//! mismatch, then fills each pixel from the best-scoring (pattern, anchor)
//! pair whose disk covers it. Reconstructions are scored by mean squared
//! error and by the 1-Wasserstein distance between sublevel-set persistence
//! diagrams.
//!
//! Module map:
//! - [`grid`]: grid types and the `.grd` / `.smp` / `.pgm` file formats
//! - [`sampling`]: uniform sampling, corruption, Gaussian embedding
//! - [`patterns`]: disk tiling, pattern extraction, rotation, `.plb` files
//! - [`operator`]: confidence fields and argmax reconstruction
//! - [`tda`]: cubical persistence and Wasserstein distance
//! - [`scenario`]: SINR formulas and synthetic urban scenes
//! - [`baselines`]: 1-nearest-neighbour reconstruction and MSE
//! - [`harness`]: leave-one-out and zero-shot experiment runs

pub mod baselines;
pub mod error;
pub mod grid;
pub mod harness;
pub mod operator;
pub mod patterns;
pub mod sampling;
pub mod scenario;
pub mod tda;

pub use error::{Error, Result};
pub use grid::{GridSignal, PixelCoord, ReliabilityMask, Sample, SparseSampling};
