//! Command-line front end for `algdiv-core`: config files, CSV/JSON output
//! and the named experiments behind each acceptance check.

pub mod cli;
pub mod config;
pub mod experiments;
pub mod io;
pub mod output;
