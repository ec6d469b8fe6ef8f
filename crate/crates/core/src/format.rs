//! Text and serde representations of exact values.

use std::str::FromStr;

use num_traits::ToPrimitive;
use serde::{Deserialize, Deserializer, Serializer};

use crate::combinatorics::Rational;

/// Nearest `f64` to an exact value.
pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// `x` rounded to 12 significant digits.
pub fn decimal(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-5..=15).contains(&magnitude) {
        return format!("{x:.11e}");
    }
    let places = (11 - magnitude).max(0) as usize;
    let s = format!("{x:.places$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// `p/q ≈ decimal`, or just `p` for integers.
pub fn exact_and_decimal(value: &Rational) -> String {
    if value.is_integer() {
        value.to_string()
    } else {
        format!("{value} ≈ {}", decimal(to_f64(value)))
    }
}

/// Serializes a [`Rational`] as the string `p/q` (or `p` when integral).
pub mod rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Rational, ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_str(value)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(de)?;
        Rational::from_str(&s).map_err(serde::de::Error::custom)
    }
}

/// Like [`rational_str`], for maps keyed by horizon or rank.
pub mod rational_map {
    use std::collections::BTreeMap;

    use serde::ser::SerializeMap;

    use super::*;

    pub fn serialize<S: Serializer>(map: &BTreeMap<usize, Rational>, ser: S) -> Result<S::Ok, S::Error> {
        let mut out = ser.serialize_map(Some(map.len()))?;
        for (key, value) in map {
            out.serialize_entry(key, &value.to_string())?;
        }
        out.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<BTreeMap<usize, Rational>, D::Error> {
        let raw = BTreeMap::<usize, String>::deserialize(de)?;
        raw.into_iter()
            .map(|(key, s)| {
                Rational::from_str(&s)
                    .map(|value| (key, value))
                    .map_err(serde::de::Error::custom)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::ratio;

    #[test]
    fn decimal_significant_digits() {
        assert_eq!(decimal(5.0 / 3.0), "1.66666666667");
        assert_eq!(decimal(9.595), "9.595");
        assert_eq!(decimal(1919.0 / 7.0), "274.142857143");
        assert_eq!(decimal(0.0), "0");
        assert_eq!(decimal(-0.25), "-0.25");
    }

    #[test]
    fn exact_and_decimal_forms() {
        assert_eq!(exact_and_decimal(&ratio(5, 3)), "5/3 ≈ 1.66666666667");
        assert_eq!(exact_and_decimal(&ratio(8, 2)), "4");
    }
}
