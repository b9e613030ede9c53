// `!(x > 0.0)` is used on purpose: it rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod curve;
pub mod dunkl;
pub mod error;
pub mod groups;
pub mod heat;
pub mod ode;
pub mod poly;
pub mod quadrature;
pub mod specfun;

pub use error::{DunklError, Result};
