//! Extended nonnegative numbers: a finite value or `+∞`.
//!
//! Distances between vertices in different components are infinite. They are
//! carried as [`Ext::Infinite`] rather than as an overflowed float so that
//! downstream code (the rate function, the DGG envelope) can branch on them.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum Ext<T> {
    Finite(T),
    Infinite,
}

pub type ExtReal = Ext<f64>;
pub type ExtHops = Ext<usize>;

impl<T: Copy> Ext<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            Ext::Finite(v) => Some(v),
            Ext::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Ext::Infinite)
    }

    pub fn is_finite(&self) -> bool {
        !self.is_infinite()
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Ext<U> {
        match self {
            Ext::Finite(v) => Ext::Finite(f(v)),
            Ext::Infinite => Ext::Infinite,
        }
    }
}

impl ExtReal {
    pub const ZERO: ExtReal = Ext::Finite(0.0);

    /// Converts a float; `+inf` becomes [`Ext::Infinite`].
    pub fn from_f64(v: f64) -> ExtReal {
        if v == f64::INFINITY {
            Ext::Infinite
        } else {
            Ext::Finite(v)
        }
    }

    /// IEEE view, with `+inf` for the infinite value.
    pub fn to_f64(self) -> f64 {
        match self {
            Ext::Finite(v) => v,
            Ext::Infinite => f64::INFINITY,
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl ExtHops {
    pub fn to_real(self) -> ExtReal {
        self.map(|h| h as f64)
    }
}

impl<T: fmt::Display> fmt::Display for Ext<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ext::Finite(v) => v.fmt(f),
            Ext::Infinite => f.write_str("inf"),
        }
    }
}

// Serialized as a plain number, or the string "inf".
impl<T: Serialize> Serialize for Ext<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Ext::Finite(v) => v.serialize(s),
            Ext::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Ext<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr<T> {
            Num(T),
            Str(String),
        }
        match Repr::<T>::deserialize(d)? {
            Repr::Num(v) => Ok(Ext::Finite(v)),
            Repr::Str(s) if s.eq_ignore_ascii_case("inf") => Ok(Ext::Infinite),
            Repr::Str(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"inf\", got {s:?}"
            ))),
        }
    }
}
