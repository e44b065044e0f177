//! Command implementations behind the `willtest` binary.

pub mod commands;
pub mod format;
pub mod svg;
