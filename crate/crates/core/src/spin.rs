use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A half-integer quantum number stored as twice its value.
///
/// Serialized as its display form, "3/2" or "1".
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt(i64);

impl Serialize for HalfInt {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for HalfInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Self::parse(&text)
            .ok_or_else(|| serde::de::Error::custom(format!("'{text}' is not a half-integer")))
    }
}

impl HalfInt {
    pub const fn from_twice(twice: i64) -> Self {
        Self(twice)
    }

    pub const fn from_int(value: i64) -> Self {
        Self(2 * value)
    }

    pub const fn twice(self) -> i64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// j(j+1), the eigenvalue of the squared angular momentum.
    pub fn casimir(self) -> f64 {
        let j = self.value();
        j * (j + 1.0)
    }

    /// 2j+1.
    pub const fn degeneracy(self) -> i64 {
        self.0 + 1
    }

    /// Parses "3/2", "1", "-1/2" or "1.5".
    pub fn parse(text: &str) -> Option<Self> {
        let text = text.trim();
        if let Some((num, den)) = text.split_once('/') {
            let num: i64 = num.trim().parse().ok()?;
            return match den.trim() {
                "2" => Some(Self(num)),
                "1" => Some(Self(2 * num)),
                _ => None,
            };
        }
        if let Ok(v) = text.parse::<i64>() {
            return Some(Self(2 * v));
        }
        let v: f64 = text.parse().ok()?;
        let twice = (2.0 * v).round();
        ((2.0 * v - twice).abs() < 1e-12).then_some(Self(twice as i64))
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// The ladder of total angular momenta j = N/2, N/2-1, ..., down to 0 or 1/2.
pub fn j_ladder(n: usize) -> impl Iterator<Item = HalfInt> {
    let n = n as i64;
    (0..=n / 2).map(move |k| HalfInt::from_twice(n - 2 * k))
}
