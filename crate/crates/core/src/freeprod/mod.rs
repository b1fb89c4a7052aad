//! Finite-dimensional amalgamated free products `*_B A_i` of matrix algebras
//! over a commutative `B`, with exact arithmetic.

pub mod context;
pub mod element;
pub mod maps;
pub mod matrix;
pub mod modules;

pub use context::{BaseKind, ContextSpec, FPContext};
pub use element::{FPElement, FPRandomParams, FPWord, Letter};
pub use maps::{LetterMaps, MatrixMap};
pub use matrix::Mat;
pub use modules::{khintchine_w1, module_col_norm, module_row_norm, redform_rhs, ModuleDecomposition};
