//! Command-line front end: report formats and the system-file loader.

#![allow(clippy::needless_range_loop)]

pub mod report;
pub mod system_file;
