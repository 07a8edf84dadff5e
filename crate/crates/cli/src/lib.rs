//! Command-line front end of the c-map engine: run configurations, the
//! `check` suite and the `eval` metric dump.

pub mod config;
pub mod eval;
pub mod suite;

pub use config::Config;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
