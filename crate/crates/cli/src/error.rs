use std::fmt;
use std::path::Path;

use pvc_core::Error;

pub const EXIT_REPORT_FAIL: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_PARSE: u8 = 3;
pub const EXIT_INTEGRITY: u8 = 4;
pub const EXIT_IO: u8 = 5;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(field: &str, e: impl fmt::Display) -> Self {
        CliError {
            code: EXIT_CONFIG,
            message: format!("{field}: {e}"),
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError {
            code: EXIT_IO,
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ParseError { .. } | Error::HeaderMalformed(_) => EXIT_PARSE,
            Error::OverlapMismatch { .. }
            | Error::CellOutOfRange { .. }
            | Error::Uncovered { .. }
            | Error::BadLength(_)
            | Error::InvalidPeerPublic(_)
            | Error::SignatureInvalid
            | Error::MacInvalid => EXIT_INTEGRITY,
            _ => EXIT_CONFIG,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}
