//! Process exit codes.
//!
//! - `0` success
//! - `1` I/O failure (unreadable input, unwritable output, cannot bind)
//! - `2` the input was read but failed schema or validation checks

use std::fmt;

pub const SUCCESS: u8 = 0;
pub const IO_FAILURE: u8 = 1;
pub const VALIDATION_FAILURE: u8 = 2;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn io(message: impl Into<String>) -> Self {
        Self {
            code: IO_FAILURE,
            message: message.into(),
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: VALIDATION_FAILURE,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}
