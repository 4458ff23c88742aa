//! Shared pieces of the `g2l` binary: exit codes and the HTTP service.

pub mod server;

use g2l_core::{Error, Stage};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_MODEL: i32 = 4;
pub const EXIT_INTERNAL: i32 = 5;

/// Process exit code for a pipeline error.
pub fn exit_code(e: &Error) -> i32 {
    if e.stage() == Some(Stage::Load) {
        return EXIT_MODEL;
    }
    match e.root() {
        Error::InvalidArgument(_) => EXIT_USAGE,
        Error::InvalidInput(_)
        | Error::Decode { .. }
        | Error::UnsupportedFormat(_)
        | Error::Validation(_)
        | Error::Corpus(_)
        | Error::Io { .. }
        | Error::Json { .. } => EXIT_INPUT,
        Error::Model(_) => EXIT_MODEL,
        Error::NonFinite(_) | Error::Internal(_) | Error::Stage { .. } => EXIT_INTERNAL,
    }
}
