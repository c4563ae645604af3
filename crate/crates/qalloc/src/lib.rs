//! File formats, a second solver backend, parallel pipelines and the
//! command implementations behind the `qalloc` binary.
//!
//! The estimation and allocation logic lives in [`qalloc_core`]; this crate
//! moves data in and out of it.

pub mod backend;
pub mod commands;
pub mod config;
pub mod csv_panel;
pub mod error;
pub mod frontier_io;
pub mod lp_format;
pub mod pipeline;
pub mod tables;

pub use error::{AppError, Result};
