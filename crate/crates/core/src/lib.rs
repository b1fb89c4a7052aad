//! Exact and numerical harmonic analysis on free group algebras and
//! finite-dimensional amalgamated free products.

pub mod algebra;
pub mod coeff;
pub mod error;
pub mod experiments;
pub mod freeprod;
pub mod io;
pub mod multipliers;
pub mod sampling;
pub mod suites;
pub mod paraproducts;
pub mod symbols;
pub mod words;

pub use algebra::{AlgElement, OpNormBracket, OpNormParams, Projection, RandomParams};
pub use coeff::{Coeff, Mode, Phase, Q, QC};
pub use error::{Error, Guard, Result};
pub use words::{Alphabet, Block, Order, ReducedWord};
