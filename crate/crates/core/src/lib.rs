// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod infotheory;
pub mod keyrate;
pub mod likelihood;
pub mod mc_validate;
pub mod numerics;
pub mod states;

pub use error::{Error, Result};
