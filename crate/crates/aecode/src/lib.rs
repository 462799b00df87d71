//! File formats, multi-threaded drivers and the command-line interface on
//! top of [`aecode_core`].

pub mod cli;
pub mod format;
pub mod fuzz;
pub mod parallel;
pub mod report;

pub use aecode_core as core;
