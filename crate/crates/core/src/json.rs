//! JSON helpers shared by every report format.
//!
//! Floats are written with 17 significant digits (`{:.16e}`) so output bytes
//! depend only on the value. Non-finite values become `null`.

use num_complex::Complex64;
use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;
use serde_json::value::RawValue;

pub const SCHEMA_VERSION: u32 = 1;

pub fn fixed(v: f64) -> Box<RawValue> {
    let text = if v.is_finite() {
        // normalize negative zero so equal values print identically
        let v = if v == 0.0 { 0.0 } else { v };
        format!("{v:.16e}")
    } else {
        "null".to_string()
    };
    RawValue::from_string(text).expect("formatted float is valid JSON")
}

pub fn ser_f64<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    fixed(*v).serialize(s)
}

pub fn ser_opt_f64<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => fixed(*v).serialize(s),
        None => s.serialize_none(),
    }
}

pub fn ser_f64_vec<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&fixed(*x))?;
    }
    seq.end()
}

pub fn ser_complex_vec<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[fixed(z.re), fixed(z.im)])?;
    }
    seq.end()
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_string<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut out = serde_json::to_string_pretty(value)?;
    out.push('\n');
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fixed(1.0).get(), "1.0000000000000000e0");
        assert_eq!(fixed(-0.0).get(), "0.0000000000000000e0");
        assert_eq!(fixed(0.1).get(), "1.0000000000000001e-1");
        assert_eq!(fixed(f64::NAN).get(), "null");
        let back: f64 = serde_json::from_str(fixed(0.1).get()).unwrap();
        assert_eq!(back, 0.1);
    }
}
