use fractal_spectra::Error;

/// An error together with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CONSISTENCY: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;
pub const EXIT_DATA: i32 = 5;
pub const EXIT_DIVERGENCE: i32 = 6;

impl CliError {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> Self {
        CliError::new(EXIT_INPUT, message)
    }

    pub fn io(what: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::new(EXIT_RESOURCE, format!("{}: {e}", what.display()))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidWord { .. } | Error::InvalidInput(_) | Error::Unsupported(_) => EXIT_INPUT,
            Error::Degenerate(_) | Error::NonEliminable(_) | Error::Consistency(_) => EXIT_CONSISTENCY,
            Error::Resource(_) => EXIT_RESOURCE,
            Error::InsufficientData(_) => EXIT_DATA,
            Error::Divergence(_) => EXIT_DIVERGENCE,
        };
        CliError::new(code, e.to_string())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}
