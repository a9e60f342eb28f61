#![no_std]
#![allow(clippy::needless_range_loop)]
#![doc = include_str!("../README.md")]

extern crate alloc;

pub mod coupling_lab;
pub mod error;
pub mod fourier_tableau;
pub mod integrals;
pub mod lyndon;
pub mod phase_lab;
pub mod rng;
pub mod sde_schemes;

pub use error::{Error, Result};
