use galactic::langmodel::LmError;
use galactic::ordering::OrderingError;
use galactic::synthesis::{SpecError, SynthesisError};
use galactic::treebank::ParseError;

pub const INTERNAL: u8 = 1;
pub const IO: u8 = 3;
pub const PARSE: u8 = 4;
pub const MISMATCH: u8 = 5;
pub const INVALID: u8 = 6;

/// Raised when `validate` (or an input precondition) finds broken data.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct Invalid(pub String);

/// Raised for inputs that are missing rather than unreadable.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct Missing(pub String);

/// Map an error to its documented exit status.
pub fn code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Invalid>() {
            return INVALID;
        }
        if cause.is::<Missing>() || cause.is::<std::io::Error>() {
            return IO;
        }
        if cause.is::<ParseError>() {
            return PARSE;
        }
        if cause.is::<SpecError>() {
            return MISMATCH;
        }
        if let Some(e) = cause.downcast_ref::<LmError>() {
            return match e {
                LmError::Format(..) => PARSE,
                _ => INVALID,
            };
        }
        if let Some(e) = cause.downcast_ref::<OrderingError>() {
            return match e {
                OrderingError::ModelFormat(..) => PARSE,
                OrderingError::ClassMismatch(..) | OrderingError::BadLambda(_) => MISMATCH,
                _ => INVALID,
            };
        }
        if let Some(e) = cause.downcast_ref::<SynthesisError>() {
            return match e {
                SynthesisError::Io { .. } | SynthesisError::MissingSplit(..) => IO,
                SynthesisError::Parse(..) => PARSE,
                SynthesisError::MissingModel { .. }
                | SynthesisError::ModelMismatch(..)
                | SynthesisError::Spec(_) => MISMATCH,
                SynthesisError::AmbiguousSplit(..) | SynthesisError::Unfiltered(..) => INVALID,
                SynthesisError::Ordering(o) => match o {
                    OrderingError::ModelFormat(..) => PARSE,
                    OrderingError::ClassMismatch(..) | OrderingError::BadLambda(_) => MISMATCH,
                    _ => INVALID,
                },
            };
        }
    }
    INTERNAL
}
