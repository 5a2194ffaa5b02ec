//! Phase-space analysis on sampled grids.
//!
//! This crate implements a family of quadratic time-frequency representations
//! parametrized by symplectic matrices, the unitary operators those matrices
//! induce on discretized function spaces, the quantization rules built from
//! them, and the localization operators obtained by smoothing a symbol with a
//! cross-representation of a window pair.
//!
//! The numerical model is a centered grid of `N` samples per axis with spacing
//! `dx`; all integrals are Riemann sums over that grid and all Fourier
//! transforms use the unitary convention with frequency measured in cycles
//! (`e^{-2πi x·ξ}`).

pub mod fftcore;
pub mod grid;
pub mod metaplectic;
pub mod sympmat;
