//! Lattice vectors serialize as maps keyed by subset label, `""` for ∅.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserializer, Serializer};

use super::{Capacity, MobiusVector, SubsetId, MAX_ATTRIBUTES};

fn serialize_lattice<S: Serializer>(values: &[f64], s: S) -> Result<S::Ok, S::Error> {
    let mut map = s.serialize_map(Some(values.len()))?;
    for (mask, v) in values.iter().enumerate() {
        map.serialize_entry(&SubsetId(mask as u32).label(), v)?;
    }
    map.end()
}

struct LatticeVisitor;

impl<'de> Visitor<'de> for LatticeVisitor {
    type Value = (usize, Vec<f64>);

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a map from subset labels to numbers covering a full lattice")
    }

    fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
        let mut entries: Vec<(String, f64)> = Vec::new();
        while let Some(e) = access.next_entry::<String, f64>()? {
            entries.push(e);
        }
        let n = entries.len();
        if !n.is_power_of_two() || n < 2 {
            return Err(de::Error::custom("entry count must be 2^g with g >= 1"));
        }
        let g = n.trailing_zeros() as usize;
        if g > MAX_ATTRIBUTES {
            return Err(de::Error::custom("too many attributes"));
        }
        let mut values = vec![f64::NAN; n];
        for (label, v) in entries {
            let id = SubsetId::parse_label(&label, g).map_err(de::Error::custom)?;
            if !values[id.index()].is_nan() {
                return Err(de::Error::custom(alloc::format!("subset `{label}` given twice")));
            }
            values[id.index()] = v;
        }
        Ok((g, values))
    }
}

impl serde::Serialize for Capacity {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize_lattice(self.values(), s)
    }
}

impl<'de> serde::Deserialize<'de> for Capacity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (g, values) = d.deserialize_map(LatticeVisitor)?;
        Capacity::from_raw(g, values).map_err(de::Error::custom)
    }
}

impl serde::Serialize for MobiusVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize_lattice(self.values(), s)
    }
}

impl<'de> serde::Deserialize<'de> for MobiusVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (g, values) = d.deserialize_map(LatticeVisitor)?;
        MobiusVector::new(g, values).map_err(de::Error::custom)
    }
}
