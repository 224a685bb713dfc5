//! Exact computation of Donaldson-Thomas invariants and stack volumes of
//! semistable twisted Higgs bundles on curves over finite fields.

pub mod cli;
pub mod curve;
pub mod dt;
pub mod error;
pub mod hall;
pub mod kernel;
pub mod oracle;
pub mod partition;
pub mod ratfun;
pub mod scalar;
pub mod series;

pub use error::{Error, Result};
