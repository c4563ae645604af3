//! Quantile production frontiers and quantile resource-allocation programs.
//!
//! The crate is `no_std` and only needs an allocator. File formats, the
//! command-line driver and additional solver backends live in the `qalloc`
//! crate.

#![no_std]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod allocation;
pub mod analysis;
pub mod cqr;
pub mod data;
pub mod error;
pub mod lp;
pub mod random_alloc;

pub use error::{Error, Result};
