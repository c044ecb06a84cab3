//! Exact rational numbers and their text/JSON encodings.
//!
//! Every probability handled by the exact modules is a [`Q`]. On the wire a
//! rational is the string `"p/q"` in lowest terms; JSON numbers are accepted
//! on input and snapped to a nearby fraction.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::Serializer;

use crate::error::Error;

/// Exact rational scalar.
pub type Q = BigRational;

/// Largest denominator accepted when snapping a float to a fraction.
pub const SNAP_MAX_DENOMINATOR: i64 = 1_000_000;

/// Maximum distance between a float and its snapped fraction.
pub const SNAP_TOLERANCE: f64 = 1e-9;

pub fn q(numer: i64, denom: i64) -> Q {
    Q::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn qi(value: i64) -> Q {
    Q::from_integer(BigInt::from(value))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

pub fn half() -> Q {
    q(1, 2)
}

/// Canonical `"p/q"` rendering (always with a denominator, lowest terms).
pub fn to_text(value: &Q) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

pub fn to_f64(value: &Q) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"p/q"`, `"p"` or a decimal literal such as `"0.25"`.
pub fn parse(text: &str) -> Result<Q, Error> {
    let t = text.trim();
    let bad = || Error::Parse(format!("invalid rational literal {text:?}"));
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(Q::new(n, d));
    }
    if let Ok(n) = t.parse::<BigInt>() {
        return Ok(Q::from_integer(n));
    }
    // Finite decimal: parse digits exactly rather than through f64.
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_part, frac_part) = body.split_once('.').ok_or_else(bad)?;
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("0{int_part}{frac_part}").parse().map_err(|_| bad())?;
    let scale = num_traits::pow(BigInt::from(10), frac_part.len());
    let value = Q::new(digits, scale);
    Ok(if neg { -value } else { value })
}

/// Best rational approximation of `x` with denominator at most `max_den`
/// (continued fractions with semiconvergents).
pub fn best_approximation(x: f64, max_den: i64) -> Option<Q> {
    if !x.is_finite() {
        return None;
    }
    let neg = x < 0.0;
    let ax = x.abs();
    let whole = ax.floor();
    if whole > 9.0e15 {
        return None;
    }
    let mut frac = ax - whole;
    // Convergents h/k of the fractional part.
    let (mut h_prev, mut h) = (1i64, 0i64);
    let (mut k_prev, mut k) = (0i64, 1i64);
    let mut best = (0i64, 1i64);
    for _ in 0..64 {
        if frac < 1e-15 {
            break;
        }
        let inv = 1.0 / frac;
        let a = inv.floor();
        if a > max_den as f64 * 2.0 {
            break;
        }
        let a = a as i64;
        frac = inv - a as f64;
        let k_next = a * k + k_prev;
        if k_next > max_den {
            // Largest admissible semiconvergent.
            let t = (max_den - k_prev) / k;
            let semi = (t * h + h_prev, t * k + k_prev);
            let cand = semi.0 as f64 / semi.1 as f64;
            let cur = best.0 as f64 / best.1 as f64;
            let fa = ax - whole;
            if t > 0 && (cand - fa).abs() < (cur - fa).abs() {
                best = semi;
            }
            break;
        }
        let h_next = a * h + h_prev;
        h_prev = h;
        h = h_next;
        k_prev = k;
        k = k_next;
        best = (h, k);
    }
    let value = qi(whole as i64) + q(best.0, best.1);
    Some(if neg { -value } else { value })
}

/// Snaps a float input to a fraction with denominator at most 10^6 lying
/// within 1e-9 of it; anything else is rejected.
pub fn snap(x: f64) -> Result<Q, Error> {
    let candidate = best_approximation(x, SNAP_MAX_DENOMINATOR)
        .ok_or_else(|| Error::Parse(format!("non-finite number {x}")))?;
    if (to_f64(&candidate) - x).abs() <= SNAP_TOLERANCE {
        Ok(candidate)
    } else {
        Err(Error::Parse(format!(
            "number {x} is not within {SNAP_TOLERANCE:e} of a fraction with denominator <= {SNAP_MAX_DENOMINATOR}"
        )))
    }
}

/// Converts a JSON value (string or number) into a rational.
pub fn from_json(value: &serde_json::Value) -> Result<Q, Error> {
    match value {
        serde_json::Value::String(s) => parse(s),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(qi(i))
            } else {
                snap(n.as_f64().unwrap_or(f64::NAN))
            }
        }
        other => Err(Error::Parse(format!("expected a rational, found {other}"))),
    }
}

/// Lowest common multiple of the denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Q>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

pub fn abs(value: &Q) -> Q {
    value.abs()
}

pub fn min<'a>(a: &'a Q, b: &'a Q) -> &'a Q {
    if a <= b {
        a
    } else {
        b
    }
}

pub fn max<'a>(a: &'a Q, b: &'a Q) -> &'a Q {
    if a >= b {
        a
    } else {
        b
    }
}

/// Serde adapter: a single rational as `"p/q"`.
pub mod serde_q {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&to_text(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        d.deserialize_any(QVisitor)
    }

    struct QVisitor;

    impl Visitor<'_> for QVisitor {
        type Value = Q;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a rational as \"p/q\" or a JSON number")
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<Q, E> {
            parse(v).map_err(E::custom)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<Q, E> {
            Ok(qi(v))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<Q, E> {
            Ok(Q::from_integer(BigInt::from(v)))
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<Q, E> {
            snap(v).map_err(E::custom)
        }
    }
}

/// Serde adapter: a sequence of rationals.
pub mod serde_q_vec {
    use super::*;
    use serde::ser::SerializeSeq;
    use serde::Deserialize;

    #[derive(Deserialize)]
    struct Wrapped(#[serde(with = "super::serde_q")] Q);

    pub fn serialize<S: Serializer>(values: &[Q], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(values.len()))?;
        for v in values {
            seq.serialize_element(&to_text(v))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
        let raw = Vec::<Wrapped>::deserialize(d)?;
        Ok(raw.into_iter().map(|w| w.0).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_forms() {
        assert_eq!(parse("2/4").unwrap(), q(1, 2));
        assert_eq!(parse(" 3 ").unwrap(), qi(3));
        assert_eq!(parse("0.125").unwrap(), q(1, 8));
        assert_eq!(parse("-.5").unwrap(), q(-1, 2));
        assert!(parse("1/0").is_err());
        assert!(parse("abc").is_err());
        assert!(parse(".").is_err());
    }

    #[test]
    fn canonical_text() {
        assert_eq!(to_text(&q(6, 8)), "3/4");
        assert_eq!(to_text(&qi(1)), "1/1");
        assert_eq!(to_text(&zero()), "0/1");
        assert_eq!(to_text(&q(-2, 6)), "-1/3");
    }

    #[test]
    fn snapping() {
        assert_eq!(snap(1.0 / 3.0).unwrap(), q(1, 3));
        assert_eq!(snap(0.25).unwrap(), q(1, 4));
        assert_eq!(snap(2.0 / 3.0 + 5e-10).unwrap(), q(2, 3));
        assert_eq!(snap(1.0).unwrap(), qi(1));
        assert_eq!(snap(-0.5).unwrap(), q(-1, 2));
        // Nearest admissible fractions are 0 and 1/10^6, both 5e-7 away.
        assert!(snap(5e-7).is_err());
        assert_eq!(snap(std::f64::consts::PI).unwrap(), q(3126535, 995207));
        assert!(snap(f64::NAN).is_err());
    }

    #[test]
    fn best_approximation_respects_denominator() {
        let pi = best_approximation(std::f64::consts::PI, 1000).unwrap();
        assert_eq!(pi, q(355, 113));
        let x = best_approximation(0.123456789, 1_000_000).unwrap();
        assert!(x.denom() <= &BigInt::from(1_000_000));
        // Brute force over all admissible denominators.
        let target = 0.123456789f64;
        let oracle = (1..=1_000_000i64)
            .map(|d| ((target * d as f64).round() / d as f64 - target).abs())
            .fold(f64::INFINITY, f64::min);
        assert!((to_f64(&x) - target).abs() <= oracle + 1e-16);
    }

    #[test]
    fn json_values() {
        assert_eq!(from_json(&serde_json::json!("1/2")).unwrap(), half());
        assert_eq!(from_json(&serde_json::json!(0.5)).unwrap(), half());
        assert_eq!(from_json(&serde_json::json!(1)).unwrap(), one());
        assert!(from_json(&serde_json::json!(null)).is_err());
    }
}
