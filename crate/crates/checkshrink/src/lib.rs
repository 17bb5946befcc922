//! File formats, a replication-parallel runner and the `checkshrink` CLI on
//! top of [`checkshrink_core`].

pub mod cli;
pub mod io;
pub mod output;
pub mod parallel;

pub use checkshrink_core as core;
