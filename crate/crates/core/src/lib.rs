//! CHC solving over arrays and linear integer arithmetic.
//!
//! The crate is organized bottom-up: terms and models, an SMT-LIB2 backend
//! client, array quantifier elimination and model-based projection, the
//! Horn clause engine, the CHC frontend, and brute-force oracles used for
//! validation.

pub mod chc;
pub mod cli;
pub mod engine;
pub mod frontend;
pub mod mbp;
pub mod model;
pub mod oracles;
pub mod qe;
pub mod sexp;
pub mod smt;
pub mod term;
