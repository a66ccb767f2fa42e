//! Exact rational scalars and their decimal-string wire form.

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a
/// positive denominator.
pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Parses `"p"` or `"p/q"` with decimal integers `p`, `q` (`q != 0`).
pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Rational(s.to_string());
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| bad())?;
    let den = BigInt::from_str(den).map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

/// Formats as `"p"` when integral and `"p/q"` otherwise.
pub fn format(r: &Rational) -> String {
    r.to_string()
}

/// Midpoint of two rationals.
pub fn midpoint(a: &Rational, b: &Rational) -> Rational {
    (a + b) / int(2)
}

pub fn is_positive(r: &Rational) -> bool {
    r.is_positive()
}

/// Serde adapter accepting a JSON string `"p/q"` or an integer literal.
/// Floats are rejected.
pub mod serde_rational {
    use super::*;
    use serde::de::{self, Deserializer, Visitor};
    use serde::Serializer;
    use std::fmt;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        d.deserialize_any(RationalVisitor)
    }

    struct RationalVisitor;

    impl<'de> Visitor<'de> for RationalVisitor {
        type Value = Rational;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a rational as \"p\", \"p/q\" or an integer")
        }

        fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Rational, E> {
            parse(v).map_err(E::custom)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Rational, E> {
            Ok(int(v))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Rational, E> {
            Ok(Rational::from_integer(BigInt::from(v)))
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Rational, E> {
            Err(E::custom(format_args!(
                "unsupported rational {v}: write non-integers as \"p/q\" strings"
            )))
        }
    }

    /// Same adapter for `Vec<Rational>`.
    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;
        use serde::Deserialize;

        #[derive(Deserialize)]
        struct Wrapped(#[serde(with = "super")] Rational);

        pub fn serialize<S: Serializer>(
            v: &[Rational],
            s: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for r in v {
                seq.serialize_element(&format(r))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Vec<Rational>, D::Error> {
            let v: Vec<Wrapped> = Vec::deserialize(d)?;
            Ok(v.into_iter().map(|w| w.0).collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse("3").unwrap(), int(3));
        assert_eq!(parse("-6/4").unwrap(), ratio(-3, 2));
        assert_eq!(parse(" 7 / 21 ").unwrap(), ratio(1, 3));
        assert!(parse("1/0").is_err());
        assert!(parse("1.5").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn format_lowest_terms() {
        assert_eq!(format(&ratio(4, -6)), "-2/3");
        assert_eq!(format(&ratio(8, 4)), "2");
    }

    #[test]
    fn json_accepts_strings_and_integers() {
        #[derive(serde::Deserialize)]
        struct W(#[serde(with = "serde_rational")] Rational);
        let w: W = serde_json::from_str("\"5/10\"").unwrap();
        assert_eq!(w.0, ratio(1, 2));
        let w: W = serde_json::from_str("-4").unwrap();
        assert_eq!(w.0, int(-4));
        assert!(serde_json::from_str::<W>("0.5").is_err());
    }
}
