// `!(x > 0.0)` also rejects NaN, which is the point of writing it that way.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atoms;
pub mod error;
pub mod fourier;
pub mod group;
pub mod laguerre;
pub mod oracle;
pub mod paley;
pub mod profile;
pub mod quadrature;

pub use error::{Error, Result};
