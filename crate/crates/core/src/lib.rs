//! Sequential unambiguous discrimination of two non-orthogonal qubit states
//! by a chain of observers.

pub mod b92;
pub mod error;
pub mod linalg;
pub mod mc;
pub mod neumark;
pub mod report;
pub mod sequential;
pub mod states;
pub mod strategies;
pub mod ud_povm;

pub use error::{Constraint, Error, Result};
