//! Shared helpers for JSON reports.

use num_bigint::BigInt;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

const DIGEST_EDGE: usize = 20;

/// Decimal rendering of `n`. Long values are shortened to their first and
/// last 20 digits plus a digit count unless `full` is set.
pub fn digest(n: &BigInt, full: bool) -> String {
    let s = n.to_string();
    let (sign, digits) = match s.strip_prefix('-') {
        Some(rest) => ("-", rest),
        None => ("", s.as_str()),
    };
    if full || digits.len() <= 2 * DIGEST_EDGE {
        return s;
    }
    format!(
        "{sign}{}...{} ({} digits)",
        &digits[..DIGEST_EDGE],
        &digits[digits.len() - DIGEST_EDGE..],
        digits.len()
    )
}

/// Recursively sorts object keys so serialized output is stable.
pub fn sorted(v: Value) -> Value {
    match v {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, sorted(v))).collect())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sorted).collect()),
        other => other,
    }
}
