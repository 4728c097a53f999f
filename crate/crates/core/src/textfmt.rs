//! Shared helpers for the line-oriented text formats.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{parse, Result};

/// Space-separated shortest round-trip exponent form.
pub(crate) fn join_f64<'a>(values: impl IntoIterator<Item = &'a f64>) -> String {
    let mut line = String::new();
    for (i, v) in values.into_iter().enumerate() {
        if i > 0 {
            line.push(' ');
        }
        write!(line, "{v:e}").expect("writing to a String");
    }
    line
}

pub(crate) fn join_display<T: std::fmt::Display>(values: impl IntoIterator<Item = T>) -> String {
    values.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

pub(crate) fn parse_list<T: FromStr>(field: &str, what: &str) -> Result<Vec<T>> {
    field
        .split_ascii_whitespace()
        .map(|tok| tok.parse::<T>().map_err(|_| parse(format!("bad value `{tok}` in {what}"))))
        .collect()
}

pub(crate) fn parse_finite(field: &str, what: &str) -> Result<Vec<f64>> {
    let values: Vec<f64> = parse_list(field, what)?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(parse(format!("non-finite value in {what}")));
    }
    Ok(values)
}

/// `key=value` tokens of a header line after its magic prefix.
pub(crate) fn header_fields(line: &str, magic: &str) -> Result<Vec<(String, String)>> {
    let rest = line
        .strip_prefix(magic)
        .ok_or_else(|| parse(format!("expected header `{magic} ...`, found `{line}`")))?;
    rest.split_ascii_whitespace()
        .map(|tok| {
            tok.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| parse(format!("bad header token `{tok}`")))
        })
        .collect()
}

pub(crate) fn header_value<T: FromStr>(fields: &[(String, String)], key: &str) -> Result<T> {
    let raw = fields
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v)
        .ok_or_else(|| parse(format!("header is missing `{key}`")))?;
    raw.parse().map_err(|_| parse(format!("bad header value `{key}={raw}`")))
}
