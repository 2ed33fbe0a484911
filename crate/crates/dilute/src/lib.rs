//! Periodic dilute Temperley–Lieb standard modules, the dilute A₂⁽²⁾ loop
//! model transfer matrices, their fusion hierarchy, and the closure
//! relations at roots of unity.

pub mod closure;
pub mod error;
pub mod fusion;
pub mod linalg;
pub mod linkstates;
pub mod planar;
pub mod projectors;
pub mod scalars;
pub mod transfer;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
