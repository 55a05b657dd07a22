//! Finite-type model domains in C^2: exact Catlin geometry, a constructive
//! renormalization engine, the rescaling method and Kobayashi metric
//! estimates, all instrumented as measurable, property-tested quantities.

pub mod disc;
pub mod domain;
pub mod error;
pub mod io;
pub mod kobayashi;
pub mod poly;
pub mod renorm;
pub mod rescale;
pub mod rng;
pub mod verify;

pub use error::{FtlError, Result};
