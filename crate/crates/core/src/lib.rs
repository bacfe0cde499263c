#![no_std]
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::excessive_precision
)]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod fock;
pub mod gaussian;
pub mod linalg;
pub mod metrics;
pub mod phase_space;
pub mod poly;
pub mod pulse;
pub mod quad;
pub mod real;
pub mod synthesis;

pub use error::{Error, Result};
