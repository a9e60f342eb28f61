//! Multithreaded front end for `iterint-core`.
//!
//! This crate adds what the `no_std` core leaves out: an FFT convolution
//! backend, deterministic parallel Monte Carlo scans over a rayon pool,
//! tableau and integral file formats, JSON and CSV run reports, and the
//! `iterint` command-line tool.
//!
//! Every parallel scan computes per-path or per-block results in index
//! order and reduces them sequentially, so reported numbers are identical
//! for every thread count.

pub mod error;
pub mod checks;
pub mod cli;
pub mod fft;
pub mod io;
pub mod parallel;
pub mod report;
pub mod scans;

pub use error::{Error, Result};
pub use fft::FftConvolver;
pub use iterint_core as core;
pub use parallel::Pool;
