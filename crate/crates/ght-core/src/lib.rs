//! Geometric transformers over quantized mixable metric spaces, their dynamic
//! (hypernetwork-driven) extension, and the exact discrete metrics they are
//! scored with.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod causal;
pub mod error;
pub mod hyper;
pub mod metric;
pub mod nn;
pub mod qas;
pub mod rng;
pub mod transformer;

pub use error::{Error, Result};
pub use nalgebra;
