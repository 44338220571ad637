//! Text formats: `.lvs` models, `.crt` certificates, and reports.

mod certificate;
mod model;
mod render;

use std::fmt;

pub use certificate::{parse_certificate, CertParams, CertValue, CertificateDocument};
pub use model::{parse_model, serialize_model, ModelDocument, ModelKind};
pub use render::{render_report, render_table, Format};

/// Position-tagged parse failure. Lines and columns are 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

/// Tokens that cannot name a state.
pub const RESERVED: &[&str] = &["inf", "omega", "bot", "accept", "geo", "beyond"];

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'' || c == '.')
        && !RESERVED.contains(&s)
}

/// A line with comments stripped, split into whitespace-separated words
/// carrying their 1-based columns.
pub(crate) struct Line<'a> {
    pub number: usize,
    pub text: &'a str,
}

impl<'a> Line<'a> {
    pub fn err(&self, column: usize, message: impl Into<String>) -> ParseError {
        ParseError::new(self.number, column, message)
    }

    /// Column of a subslice of `text`.
    pub fn col(&self, part: &str) -> usize {
        part.as_ptr() as usize - self.text.as_ptr() as usize + 1
    }

    pub fn words(&self) -> Vec<&'a str> {
        self.text.split_whitespace().collect()
    }
}

pub(crate) fn lines(text: &str) -> impl Iterator<Item = Line<'_>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let text = match raw.find('#') {
            Some(k) => &raw[..k],
            None => raw,
        };
        (!text.trim().is_empty()).then_some(Line { number: i + 1, text })
    })
}
