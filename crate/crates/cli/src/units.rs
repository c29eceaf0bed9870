//! Lengths with unit suffixes and exact ratios.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    Meter,
    Centimeter,
    Millimeter,
    Micrometer,
    Nanometer,
    /// Fraction of the waveguide width.
    Width,
    /// Fraction of the waveguide length.
    Length,
    Talbot,
    Revival,
}

impl Unit {
    const TABLE: [(&'static str, Unit); 10] = [
        ("zT", Unit::Talbot),
        ("z0", Unit::Revival),
        ("nm", Unit::Nanometer),
        ("um", Unit::Micrometer),
        ("µm", Unit::Micrometer),
        ("mm", Unit::Millimeter),
        ("cm", Unit::Centimeter),
        ("m", Unit::Meter),
        ("D", Unit::Width),
        ("L", Unit::Length),
    ];

    fn suffix(self) -> &'static str {
        Self::TABLE.iter().find(|(_, u)| *u == self).map(|(s, _)| *s).unwrap()
    }

    pub fn is_absolute(self) -> bool {
        matches!(self, Unit::Meter | Unit::Centimeter | Unit::Millimeter | Unit::Micrometer | Unit::Nanometer)
    }
}

/// Scale factors for the relative units.
#[derive(Debug, Clone, Copy)]
pub struct LengthScales {
    pub width: f64,
    pub length: f64,
    pub talbot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Length {
    pub value: f64,
    pub unit: Unit,
}

impl Length {
    pub const fn new(value: f64, unit: Unit) -> Self {
        Self { value, unit }
    }

    pub fn meters(value: f64) -> Self {
        Self::new(value, Unit::Meter)
    }

    /// Absolute value in meters, or `None` for relative units.
    pub fn absolute(&self) -> Option<f64> {
        // dividing by an exact power of ten keeps `57um` == 57e-6
        let per_meter = match self.unit {
            Unit::Meter => 1.0,
            Unit::Centimeter => 1e2,
            Unit::Millimeter => 1e3,
            Unit::Micrometer => 1e6,
            Unit::Nanometer => 1e9,
            _ => return None,
        };
        Some(self.value / per_meter)
    }

    pub fn resolve(&self, s: &LengthScales) -> f64 {
        match self.unit {
            Unit::Width => self.value * s.width,
            Unit::Length => self.value * s.length,
            Unit::Talbot => self.value * s.talbot,
            Unit::Revival => self.value * 4.0 * s.talbot,
            _ => self.absolute().unwrap(),
        }
    }
}

impl fmt::Display for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.value, self.unit.suffix())
    }
}

impl FromStr for Length {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let t = s.trim();
        for (suffix, unit) in Unit::TABLE {
            if let Some(num) = t.strip_suffix(suffix) {
                let value = parse_number(num).ok_or_else(|| format!("invalid length `{s}`"))?;
                return Ok(Length::new(value, unit));
            }
        }
        parse_number(t)
            .map(Length::meters)
            .ok_or_else(|| format!("invalid length `{s}` (expected e.g. `57um`, `4.85cm`, `0.3D`, `2zT`)"))
    }
}

fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    if s.is_empty() {
        return Some(1.0);
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

impl Serialize for Length {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

struct LengthVisitor;

impl Visitor<'_> for LengthVisitor {
    type Value = Length;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a length in meters or a string with a unit suffix")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Length, E> {
        v.parse().map_err(E::custom)
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Length, E> {
        Ok(Length::meters(v))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Length, E> {
        Ok(Length::meters(v as f64))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Length, E> {
        Ok(Length::meters(v as f64))
    }
}

impl<'de> Deserialize<'de> for Length {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_any(LengthVisitor)
    }
}

/// A positive number, optionally written as an exact fraction `p/q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ratio {
    pub numerator: f64,
    pub denominator: f64,
}

impl Ratio {
    pub fn value(&self) -> f64 {
        self.numerator / self.denominator
    }
}

impl FromStr for Ratio {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("invalid ratio `{s}` (expected a number or `p/q`)");
        let (p, q) = match s.split_once('/') {
            Some((p, q)) => (p.trim().parse::<f64>().map_err(|_| bad())?, q.trim().parse::<f64>().map_err(|_| bad())?),
            None => (s.trim().parse::<f64>().map_err(|_| bad())?, 1.0),
        };
        if !(p.is_finite() && q.is_finite() && q != 0.0) {
            return Err(bad());
        }
        Ok(Ratio { numerator: p, denominator: q })
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.denominator == 1.0 {
            s.serialize_f64(self.numerator)
        } else {
            s.collect_str(&format_args!("{}/{}", self.numerator, self.denominator))
        }
    }
}

struct RatioVisitor;

impl Visitor<'_> for RatioVisitor {
    type Value = Ratio;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number or a fraction string `p/q`")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Ratio, E> {
        v.parse().map_err(E::custom)
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Ratio, E> {
        Ok(Ratio { numerator: v, denominator: 1.0 })
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Ratio, E> {
        Ok(Ratio { numerator: v as f64, denominator: 1.0 })
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Ratio, E> {
        Ok(Ratio { numerator: v as f64, denominator: 1.0 })
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_any(RatioVisitor)
    }
}
