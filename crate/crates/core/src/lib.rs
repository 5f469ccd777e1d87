#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod exp_poly;
pub mod expansion;
pub mod linalg;
pub mod propagator;
pub mod quadrature;
pub mod reference;
pub mod systems;

pub use error::{Error, Result};
pub use num_complex::Complex64;
