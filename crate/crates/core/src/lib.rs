//! k-self-similar sets presented by digit automata: k-kernels, subdivision
//! matrices, certified dimensions, exact entropy counts and graph-directed
//! constructions.

pub mod automaton;
pub mod boxoracle;
pub mod corpus;
pub mod digits;
pub mod entropy;
pub mod error;
pub mod ggdc;
pub mod kernel;
pub mod matrix;
pub mod numeric;
pub mod render;
pub mod saturate;
pub mod spectral;
pub mod specdsl;

pub use error::{Error, ErrorKind, Result};
