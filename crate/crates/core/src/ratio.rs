//! Exact rationals as `"p/q"` strings.
//!
//! All coefficients in serialized objects use this form; integers are written without
//! a denominator (`"-3"`), and parsing accepts both.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serializer};

use crate::{Error, Result};

pub fn format(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num).map_err(|e| Error::Parse(format!("`{s}`: {e}")))?;
    let den = BigInt::from_str(den).map_err(|e| Error::Parse(format!("`{s}`: {e}")))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("`{s}`: zero denominator")));
    }
    Ok(BigRational::new(num, den))
}

pub fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn frac(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn is_nonneg(r: &BigRational) -> bool {
    !r.is_negative()
}

pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format(r))
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
    let s = String::deserialize(d)?;
    parse(&s).map_err(serde::de::Error::custom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_and_parses() {
        assert_eq!(format(&frac(-6, 4)), "-3/2");
        assert_eq!(format(&int(7)), "7");
        assert_eq!(parse(" 10/4 ").unwrap(), frac(5, 2));
        assert_eq!(parse("-3").unwrap(), int(-3));
        assert!(parse("1/0").is_err());
        assert!(parse("x").is_err());
    }
}
