// `!(x > 0.0)` is used on purpose: it rejects NaN along with the range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod dynamics;
pub mod error;
pub mod lif;
pub mod lqr;
pub mod metrics;
pub mod nef;

pub use error::{Error, Result};
