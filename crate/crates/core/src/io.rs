//! Serialization helpers: non-finite floats in JSON and round-trip CSV.

use std::fmt::Write as _;

/// Serializes `f64` as a number when finite and as `"inf"`, `"-inf"` or `"nan"` otherwise.
pub mod extended_f64 {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
                "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(de::Error::custom(format!("expected a number, got {other:?}"))),
            },
        }
    }
}

/// Same as [`extended_f64`] for vectors.
pub mod extended_f64_vec {
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    struct Wrap(f64);

    impl serde::Serialize for Wrap {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            super::extended_f64::serialize(&self.0, s)
        }
    }

    #[derive(Deserialize)]
    struct Unwrap(#[serde(with = "super::extended_f64")] f64);

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for &x in v {
            seq.serialize_element(&Wrap(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let v: Vec<Unwrap> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|u| u.0).collect())
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_f64(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    format!("{v:.16e}")
}

/// Comma-separated table with a header row; columns must have equal length.
pub fn csv_table(headers: &[&str], columns: &[&[f64]]) -> String {
    assert_eq!(headers.len(), columns.len());
    let rows = columns.first().map_or(0, |c| c.len());
    assert!(columns.iter().all(|c| c.len() == rows), "ragged CSV columns");
    let mut out = headers.join(",");
    out.push('\n');
    for i in 0..rows {
        for (k, c) in columns.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", format_f64(c[i]));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_digits() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, f64::MIN_POSITIVE] {
            let s = format_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn table_layout() {
        let t = csv_table(&["x", "u"], &[&[0.0, 0.5], &[1.0, 2.0]]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "x,u");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0,1.0000000000000000e0"));
    }
}
