// NaN must fail the domain checks, so `!(x > 0.0)` is deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Tabulated constants keep their published digits.
#![allow(clippy::excessive_precision)]

pub mod error;
pub mod kacrice;
pub mod linalg;
pub mod montecarlo;
pub mod orthopoly;
pub mod quadrature;
pub mod special;
pub mod stats;
pub mod weight;
pub mod zeros;

pub use error::{Error, Result};
