//! Serde helpers that write integers as JSON numbers while they fit in an
//! IEEE double (`<= 2^53 - 1`) and as decimal strings beyond that. Both
//! spellings are accepted on input.

use num_bigint::BigInt;
use serde::de::{self, Deserializer, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use std::fmt;

pub const MAX_SAFE: u64 = (1 << 53) - 1;

/// A `u64` with the number-or-string JSON encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SafeU64(pub u64);

impl Serialize for SafeU64 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0 <= MAX_SAFE {
            s.serialize_u64(self.0)
        } else {
            s.serialize_str(&self.0.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for SafeU64 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = SafeU64;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a non-negative integer or a decimal string")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<SafeU64, E> {
                Ok(SafeU64(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<SafeU64, E> {
                u64::try_from(v).map(SafeU64).map_err(E::custom)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<SafeU64, E> {
                v.trim().parse().map(SafeU64).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

/// A `BigInt` with the number-or-string JSON encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SafeInt(pub BigInt);

impl Serialize for SafeInt {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(&self.0) {
            Ok(v) if v.unsigned_abs() <= MAX_SAFE => s.serialize_i64(v),
            _ => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for SafeInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = SafeInt;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer or a decimal string")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<SafeInt, E> {
                Ok(SafeInt(v.into()))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<SafeInt, E> {
                Ok(SafeInt(v.into()))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<SafeInt, E> {
                v.trim().parse().map(SafeInt).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

pub mod u64 {
    use super::*;

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        SafeU64(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        SafeU64::deserialize(d).map(|v| v.0)
    }
}

pub mod option {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<u64>, s: S) -> Result<S::Ok, S::Error> {
        v.map(SafeU64).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<u64>, D::Error> {
        Ok(Option::<SafeU64>::deserialize(d)?.map(|v| v.0))
    }
}

/// Any sequence of `u64` (e.g. `Vec` or `BTreeSet`).
pub mod vec {
    use super::*;

    pub fn serialize<'a, S, C>(v: &'a C, s: S) -> Result<S::Ok, S::Error>
    where
        S: Serializer,
        &'a C: IntoIterator<Item = &'a u64>,
    {
        let mut seq = s.serialize_seq(None)?;
        for x in v {
            seq.serialize_element(&SafeU64(*x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D, C>(d: D) -> Result<C, D::Error>
    where
        D: Deserializer<'de>,
        C: FromIterator<u64>,
    {
        Ok(Vec::<SafeU64>::deserialize(d)?
            .into_iter()
            .map(|v| v.0)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn large_values_become_strings() {
        assert_eq!(
            serde_json::to_string(&SafeU64(MAX_SAFE)).unwrap(),
            MAX_SAFE.to_string()
        );
        assert_eq!(
            serde_json::to_string(&SafeU64(MAX_SAFE + 1)).unwrap(),
            format!("\"{}\"", MAX_SAFE + 1)
        );
        let big: BigInt = "123456789012345678901234567890".parse().unwrap();
        let json = serde_json::to_string(&SafeInt(big.clone())).unwrap();
        assert_eq!(json, "\"123456789012345678901234567890\"");
        assert_eq!(serde_json::from_str::<SafeInt>(&json).unwrap().0, big);
        assert_eq!(
            serde_json::from_str::<SafeU64>("\"17\"").unwrap(),
            SafeU64(17)
        );
        assert_eq!(serde_json::from_str::<SafeU64>("17").unwrap(), SafeU64(17));
        assert!(serde_json::from_str::<SafeU64>("-1").is_err());
    }
}
