//! Serde helpers.

use std::fmt::Display;

use serde::Serializer;

/// Serializes through `Display`, for integers too wide for JSON numbers.
pub(crate) fn display<T: Display, S: Serializer>(value: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(value)
}
