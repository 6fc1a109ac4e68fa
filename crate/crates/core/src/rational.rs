//! Exact rational helpers: parsing, canonical text, harmonic numbers, factorials.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Parses `p/q`, integers, and decimals with optional exponent, exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    if t.is_empty() {
        return Err(Error::Parse("empty number".into()));
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {t:?}")))?;
        let q: BigInt = q
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {t:?}")))?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {t:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(k) => {
            let e: i64 = t[k + 1..]
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent in {t:?}")))?;
            (&t[..k], e)
        }
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty()
        || !whole
            .chars()
            .chain(frac.chars())
            .all(|c| c.is_ascii_digit())
    {
        return Err(Error::Parse(format!("not a number: {t:?}")));
    }
    let all: BigInt = format!("{whole}{frac}")
        .parse()
        .unwrap_or_else(|_| BigInt::zero());
    let scale = exp - frac.len() as i64;
    if scale.abs() > 4096 {
        return Err(Error::Parse(format!("exponent out of range in {t:?}")));
    }
    let ten = BigInt::from(10);
    let mut r = Rational::from_integer(all);
    if scale >= 0 {
        r *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -r } else { r })
}

/// Reads a JSON number or `"p/q"` string.
pub fn rational_from_json(v: &Value) -> Result<Rational> {
    match v {
        Value::Number(n) => parse_rational(&n.to_string()),
        Value::String(s) => parse_rational(s),
        other => Err(Error::Parse(format!(
            "expected number or \"p/q\" string, got {other}"
        ))),
    }
}

/// Canonical instance encoding: integers as JSON numbers when they fit, otherwise `"p/q"`.
pub fn rational_to_json(r: &Rational) -> Value {
    if r.is_integer() {
        if let Some(i) = r.numer().to_i64() {
            return Value::from(i);
        }
    }
    Value::String(r.to_string())
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Nearest rational with denominator bounded by 10^12, for turning solver-facing floats into exact params.
pub fn from_f64(x: f64) -> Rational {
    Rational::from_float(x).unwrap_or_else(Rational::zero)
}

pub fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

/// `H_k = 1 + 1/2 + ... + 1/k`, zero for `k = 0`.
pub fn harmonic_int(k: u64) -> Rational {
    (1..=k).fold(Rational::zero(), |acc, j| {
        acc + Rational::new(BigInt::one(), BigInt::from(j))
    })
}

/// Harmonic number with the floor convention: sums `1/k` for `k = 1..=floor(x)`.
pub fn harmonic(x: &Rational) -> Rational {
    if x.is_negative() || *x < Rational::one() {
        return Rational::zero();
    }
    let k = x
        .floor()
        .to_integer()
        .to_u64()
        .expect("harmonic argument fits in u64");
    harmonic_int(k)
}

pub fn harmonic_f64(x: f64) -> Rational {
    if !(x >= 1.0) {
        return Rational::zero();
    }
    harmonic_int(x.floor() as u64)
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    acc
}

pub fn binomial_u64(n: usize, k: usize) -> u64 {
    binomial(n as u64, k as u64).to_u64().unwrap_or(u64::MAX)
}

/// Serde adapters that write exact values as `"p/q"` strings.
pub mod as_string {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_rational(&s).map_err(serde::de::Error::custom)
    }

    pub mod opt {
        use super::Rational;
        use serde::Serializer;

        pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            match r {
                Some(r) => s.serialize_str(&r.to_string()),
                None => s.serialize_none(),
            }
        }
    }

    pub mod vec {
        use super::Rational;
        use serde::ser::SerializeSeq;
        use serde::Serializer;

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for r in v {
                seq.serialize_element(&r.to_string())?;
            }
            seq.end()
        }
    }
}

/// Rounds a solver float to 12 significant digits for reports.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub mod float12 {
    use serde::ser::SerializeSeq;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(super::round12(*x))
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for x in v {
                seq.serialize_element(&super::super::round12(*x))?;
            }
            seq.end()
        }
    }

    pub mod opt {
        use super::*;

        pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            match x {
                Some(x) => s.serialize_f64(super::super::round12(*x)),
                None => s.serialize_none(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_forms() {
        assert_eq!(parse_rational("3/6").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("-4").unwrap(), int(-4));
        assert_eq!(parse_rational("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse_rational("1.5e2").unwrap(), int(150));
        assert_eq!(parse_rational("2e-1").unwrap(), ratio(1, 5));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn harmonic_values() {
        assert_eq!(harmonic(&int(1)), int(1));
        assert_eq!(harmonic(&parse_rational("2.9").unwrap()), ratio(3, 2));
        assert_eq!(harmonic(&int(4)), ratio(25, 12));
        assert_eq!(harmonic(&ratio(1, 2)), int(0));
        assert_eq!(harmonic_f64(2.9), ratio(3, 2));
    }

    #[test]
    fn harmonic_minus_log_band() {
        let mut prev = Rational::zero();
        for n in 1..=200u64 {
            let h = harmonic_int(n);
            assert!(h >= prev);
            let gap = to_f64(&h) - (n as f64).ln();
            assert!((0.5..=1.0).contains(&gap), "n={n} gap={gap}");
            prev = h;
        }
    }

    #[test]
    fn json_encoding_is_canonical() {
        assert_eq!(rational_to_json(&int(7)), Value::from(7));
        assert_eq!(rational_to_json(&ratio(2, 4)), Value::from("1/2"));
        assert_eq!(
            rational_from_json(&Value::from("1/2")).unwrap(),
            ratio(1, 2)
        );
        assert_eq!(
            rational_from_json(&serde_json::json!(0.5)).unwrap(),
            ratio(1, 2)
        );
    }

    #[test]
    fn combinatorics() {
        assert_eq!(factorial(5), BigInt::from(120));
        assert_eq!(binomial(12, 3), BigInt::from(220));
        assert_eq!(binomial(3, 5), BigInt::zero());
        assert_eq!(round12(0.1 + 0.2), 0.3);
    }
}
