use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A length in millimeters that may also be infinite.
///
/// Infinity is a distinct variant rather than a large number: a far limit
/// past the hyperfocal distance and an object "at infinity" are both real
/// outcomes of the optics and are handled explicitly wherever they occur.
/// Finite values are strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distance {
    Finite(f64),
    Infinity,
}

impl Distance {
    pub fn mm(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Distance::Finite(value))
        } else if value == f64::INFINITY {
            Ok(Distance::Infinity)
        } else {
            Err(Error::domain(
                "distance",
                format!("{value} is not a positive length"),
            ))
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Distance::Infinity)
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            Distance::Finite(v) => Some(v),
            Distance::Infinity => None,
        }
    }

    /// The value as an `f64`, mapping infinity to `f64::INFINITY`.
    pub fn as_f64(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl PartialOrd for Distance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.as_f64().partial_cmp(&other.as_f64())
    }
}

impl From<f64> for Distance {
    /// Lossy convenience conversion; `f64::INFINITY` maps to [`Distance::Infinity`].
    fn from(value: f64) -> Self {
        if value.is_infinite() && value > 0.0 {
            Distance::Infinity
        } else {
            Distance::Finite(value)
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite(v) => write!(f, "{}", format_sig(*v)),
            Distance::Infinity => f.write_str("inf"),
        }
    }
}

/// Formats a finite value in plain decimal notation with ten significant digits.
pub fn format_sig(value: f64) -> String {
    const SIG: i32 = 10;
    if value == 0.0 || !value.is_finite() {
        return format!("{value}");
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (SIG - 1 - magnitude).max(0) as usize;
    format!("{value:.decimals$}")
}

impl Serialize for Distance {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Distance::Finite(v) => serializer.serialize_f64(*v),
            Distance::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Distance {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct DistanceVisitor;

        impl Visitor<'_> for DistanceVisitor {
            type Value = Distance;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a positive number of millimeters or \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Distance, E> {
                Distance::mm(v).map_err(E::custom)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Distance, E> {
                self.visit_f64(v as f64)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Distance, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Distance, E> {
                v.parse::<Distance>().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(DistanceVisitor)
    }
}

impl std::str::FromStr for Distance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
            return Ok(Distance::Infinity);
        }
        let value: f64 = s
            .parse()
            .map_err(|_| Error::domain("distance", format!("cannot parse {s:?} as millimeters")))?;
        Distance::mm(value)
    }
}
