#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
mod complex_serde;
pub mod exec;
pub mod scalar;

pub use error::{Error, Result};
pub use exec::Execution;
pub mod space;
pub mod magnitude;
pub mod formal;
pub mod mellin;
pub mod fit;
