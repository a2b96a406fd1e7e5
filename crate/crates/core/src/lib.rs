#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod bessel;
pub mod eig;
pub mod fiber;
pub mod geometry;
pub mod harness;
pub mod strip;
pub mod transplant;
pub mod width;
