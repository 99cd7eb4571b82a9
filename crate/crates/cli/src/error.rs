use std::fmt;

/// Exit code 0: success, including a found violation.
pub const EXIT_OK: i32 = 0;
/// Malformed input, schema or dimension errors.
pub const EXIT_INPUT: i32 = 1;
/// Numerical failure: instability, non-convergence, singular solves.
pub const EXIT_NUMERICAL: i32 = 2;
/// Counterexample search exhausted its budget.
pub const EXIT_EXHAUSTED: i32 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_NUMERICAL,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<riccati_core::Error> for CliError {
    fn from(e: riccati_core::Error) -> Self {
        if e.is_numerical() {
            CliError::numerical(e.to_string())
        } else {
            CliError::input(e.to_string())
        }
    }
}
