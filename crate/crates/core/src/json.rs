//! JSON encoding helpers: integers as decimal strings, reals as enclosures.

use rug::Integer;
use serde_json::{json, Value};

use crate::interval::Interval;

pub fn int(n: &Integer) -> Value {
    Value::String(n.to_string())
}

/// `{"lo": .., "hi": .., "precision_bits": ..}` with 40 significant digits per endpoint.
pub fn real(x: &Interval) -> Value {
    let (lo, hi) = x.to_decimal(40);
    json!({ "lo": lo, "hi": hi, "precision_bits": x.prec() })
}

/// Serialize with sorted keys and a trailing newline.
pub fn to_canonical_string(v: &Value) -> String {
    // serde_json's default map is a BTreeMap, so keys come out sorted.
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_round_trip() {
        let v = json!({ "b": int(&Integer::from(12)), "a": real(&Interval::pi(128)) });
        let s = to_canonical_string(&v);
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(to_canonical_string(&back), s);
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
    }
}
