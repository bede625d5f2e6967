//! Library surface of the batch front-end, shared by the binary and the
//! acceptance suite.

pub mod config;
pub mod plot;
pub mod runner;
pub mod verify;

/// Process exit codes: 0 pass, 1 verification fail, 2 config/validation
/// error, 3 runtime error.
pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
