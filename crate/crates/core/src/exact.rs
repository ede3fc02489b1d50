//! Exact rational numbers and their text forms.
//!
//! All decision arithmetic runs on [`Exact`]. Rounding happens only when a
//! value is rendered for display ([`to_fixed`]) or when a caller explicitly
//! asks for it ([`round_half_up`]).

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational used for every value, weight and total.
pub type Exact = BigRational;

pub fn int(n: i64) -> Exact {
    Exact::from_integer(BigInt::from(n))
}

/// `n / d`. Panics on a zero denominator.
pub fn ratio(n: i64, d: i64) -> Exact {
    Exact::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid exact number {input:?}: {reason}")]
pub struct ParseExactError {
    pub input: String,
    pub reason: &'static str,
}

/// Parses `"17/4"`, `"-3"`, or a plain decimal such as `"4.25"` into an exact value.
pub fn parse_exact(text: &str) -> Result<Exact, ParseExactError> {
    let s = text.trim();
    let fail = |reason| ParseExactError {
        input: text.to_string(),
        reason,
    };
    if s.is_empty() {
        return Err(fail("empty"));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| fail("bad numerator"))?;
        let d: BigInt = d.trim().parse().map_err(|_| fail("bad denominator"))?;
        if d.is_zero() {
            return Err(fail("zero denominator"));
        }
        return Ok(Exact::new(n, d));
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(fail("no digits"));
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(fail("not a number"));
    }
    let digits = format!("{whole}{frac}");
    let numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| fail("not a number"))?
    };
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    let value = Exact::new(numer, denom);
    Ok(if negative { -value } else { value })
}

/// Canonical text form: `"n"` for integers, `"n/d"` otherwise.
pub fn to_ratio_string(x: &Exact) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Rounds to `dp` decimals, halves away from zero.
pub fn round_half_up(x: &Exact, dp: u32) -> Exact {
    let scale = num_traits::pow(BigInt::from(10), dp as usize);
    let scaled = x * Exact::from_integer(scale.clone());
    let (q, r) = scaled.numer().div_rem(scaled.denom());
    let twice = r.abs() * 2;
    let mut q = q;
    if twice >= *scaled.denom() {
        if scaled.is_negative() {
            q -= BigInt::one();
        } else {
            q += BigInt::one();
        }
    }
    Exact::new(q, scale)
}

/// Fixed-point display string with exactly `dp` decimals (round half up).
pub fn to_fixed(x: &Exact, dp: u32) -> String {
    let r = round_half_up(x, dp);
    let scale = num_traits::pow(BigInt::from(10), dp as usize);
    let units = (r * Exact::from_integer(scale)).to_integer();
    let negative = units.is_negative();
    let digits = units.abs().to_string();
    let dp = dp as usize;
    let body = if dp == 0 {
        digits
    } else {
        let padded = format!("{:0>width$}", digits, width = dp + 1);
        let (w, f) = padded.split_at(padded.len() - dp);
        format!("{w}.{f}")
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

pub fn to_f64(x: &Exact) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Display adapter: `format!("{}", Fixed(&x, 2))`.
pub struct Fixed<'a>(pub &'a Exact, pub u32);

impl fmt::Display for Fixed<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&to_fixed(self.0, self.1))
    }
}

/// Serde adapter storing exact numbers as ratio strings.
pub mod serde_ratio {
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Exact, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&to_ratio_string(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Exact, D::Error> {
        let text = String::deserialize(d)?;
        parse_exact(&text).map_err(de::Error::custom)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(x: &Option<Exact>, s: S) -> Result<S::Ok, S::Error> {
            match x {
                Some(v) => s.serialize_some(&to_ratio_string(v)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Exact>, D::Error> {
            let text = Option::<String>::deserialize(d)?;
            text.map(|t| parse_exact(&t).map_err(de::Error::custom))
                .transpose()
        }
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(xs: &[Exact], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(xs.len()))?;
            for x in xs {
                seq.serialize_element(&to_ratio_string(x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Exact>, D::Error> {
            Vec::<String>::deserialize(d)?
                .iter()
                .map(|t| parse_exact(t).map_err(de::Error::custom))
                .collect()
        }
    }

    pub mod map {
        use super::*;
        use serde::ser::SerializeMap;
        use std::collections::BTreeMap;

        pub fn serialize<S: Serializer>(
            xs: &BTreeMap<String, Exact>,
            s: S,
        ) -> Result<S::Ok, S::Error> {
            let mut map = s.serialize_map(Some(xs.len()))?;
            for (k, v) in xs {
                map.serialize_entry(k, &to_ratio_string(v))?;
            }
            map.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> Result<BTreeMap<String, Exact>, D::Error> {
            BTreeMap::<String, String>::deserialize(d)?
                .into_iter()
                .map(|(k, t)| parse_exact(&t).map(|v| (k, v)).map_err(de::Error::custom))
                .collect()
        }
    }
}
