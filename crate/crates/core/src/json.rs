//! Canonical JSON: sorted object keys, UTF-8, no insignificant whitespace.

use serde::Serialize;

/// Serializes `value` canonically. Going through [`serde_json::Value`] sorts
/// object keys because its map type is ordered.
pub fn canonical_json<T: Serialize + ?Sized>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("value serializes to JSON");
    serde_json::to_string(&value).expect("JSON value serializes")
}
