//! Quantum symmetric pairs: root data, U_q representations, coideals, K-matrices,
//! cyclotomic KZ monodromy and the rank-one twisted double.

pub mod diagrams;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod coideal;
pub mod kzmono;
pub mod lusztig;
pub mod rmatrix;
pub mod rootsys;
pub mod uqrep;
pub mod vogan10;

pub use error::{QspError, Result};
pub use linalg::{CMat, C64};
pub use rootsys::{build_root_datum, parse_type, CartanType, RootDatum, Weight, WeylWord, Q};
