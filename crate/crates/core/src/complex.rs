//! Complex scalar literals in the `a+bj` text form used by every file format
//! and command-line flag of the toolkit.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Parses `"1.5"`, `"-2j"`, `"-0.16+0.55j"`, `"1e-3-2.5e+2i"` and friends.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(Error::Parse("empty complex literal".into()));
    }
    let bad = || Error::Parse(format!("malformed complex literal `{text}`"));

    let Some(body) = t.strip_suffix(['j', 'i', 'J', 'I']) else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };

    // Split at the last sign that is neither leading nor part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));

    let parse_imag = |s: &str| -> Result<f64> {
        match s {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => s.parse::<f64>().map_err(|_| bad()),
        }
    };

    match split {
        Some(i) => {
            let re = body[..i].parse::<f64>().map_err(|_| bad())?;
            let im = parse_imag(&body[i..])?;
            Ok(Complex64::new(re, im))
        }
        None => Ok(Complex64::new(0.0, parse_imag(body)?)),
    }
}

/// Shortest round-trip text for `z`; purely real values print without the
/// imaginary part.
pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im.is_sign_negative() {
        format!("{}-{}j", z.re, -z.im)
    } else {
        format!("{}+{}j", z.re, z.im)
    }
}

/// Parses a comma-separated list of complex literals.
pub fn parse_complex_list(text: &str) -> Result<Vec<Complex64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse_complex)
        .collect()
}

pub mod serde_complex {
    //! Serde adapters storing [`Complex64`] values as `a+bj` strings.
    use super::{format_complex, parse_complex};
    use num_complex::Complex64;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_complex(*z))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let text = String::deserialize(d)?;
        parse_complex(&text).map_err(D::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for z in v {
                seq.serialize_element(&format_complex(*z))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
            let items = Vec::<String>::deserialize(d)?;
            items
                .iter()
                .map(|t| parse_complex(t).map_err(D::Error::custom))
                .collect()
        }
    }
}
