//! Shared error types. Subsystem-specific errors live next to their module.

use thiserror::Error;

/// A number literal or endpoint that could not be parsed.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("invalid number `{text}`")]
pub struct ParseNumberError {
    pub text: String,
}

impl ParseNumberError {
    pub fn new(text: impl Into<String>) -> Self {
        ParseNumberError { text: text.into() }
    }
}
