//! Serde encodings for the exact domain types.
//!
//! Integers are JSON numbers when they fit in an `i64` and decimal strings
//! otherwise. Lattices and subtori are encoded by their canonical HNF basis
//! and are rejected on parse if the basis is not canonical.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::{IntMatrix, IntPolynomial, Lattice, UnimodularMatrix};
use crate::torus::{PrimitiveCovector, Subtorus};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct JInt(pub BigInt);

impl Serialize for JInt {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for JInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            I(i64),
            U(u64),
            S(String),
        }
        match Repr::deserialize(d)? {
            Repr::I(v) => Ok(JInt(BigInt::from(v))),
            Repr::U(v) => Ok(JInt(BigInt::from(v))),
            Repr::S(s) => s
                .trim()
                .parse::<BigInt>()
                .map(JInt)
                .map_err(|_| D::Error::custom(format!("invalid integer literal {s:?}"))),
        }
    }
}

fn to_j(v: &[BigInt]) -> Vec<JInt> {
    v.iter().cloned().map(JInt).collect()
}

fn from_j(v: Vec<JInt>) -> Vec<BigInt> {
    v.into_iter().map(|j| j.0).collect()
}

fn rows_to_j(rows: &[Vec<BigInt>]) -> Vec<Vec<JInt>> {
    rows.iter().map(|r| to_j(r)).collect()
}

fn rows_from_j(rows: Vec<Vec<JInt>>) -> Vec<Vec<BigInt>> {
    rows.into_iter().map(from_j).collect()
}

/// `#[serde(with = "crate::io::codec::big")]`
pub mod big {
    use super::*;
    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        JInt(v.clone()).serialize(s)
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        Ok(JInt::deserialize(d)?.0)
    }
}

/// `#[serde(with = "crate::io::codec::big_opt")]`
pub mod big_opt {
    use super::*;
    pub fn serialize<S: Serializer>(v: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
        v.clone().map(JInt).serialize(s)
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigInt>, D::Error> {
        Ok(Option::<JInt>::deserialize(d)?.map(|j| j.0))
    }
}

/// `#[serde(with = "crate::io::codec::big_vec")]`
pub mod big_vec {
    use super::*;
    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        to_j(v).serialize(s)
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        Ok(from_j(Vec::<JInt>::deserialize(d)?))
    }
}

/// `#[serde(with = "crate::io::codec::big_rows")]`
pub mod big_rows {
    use super::*;
    pub fn serialize<S: Serializer>(v: &[Vec<BigInt>], s: S) -> Result<S::Ok, S::Error> {
        rows_to_j(v).serialize(s)
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<BigInt>>, D::Error> {
        Ok(rows_from_j(Vec::<Vec<JInt>>::deserialize(d)?))
    }
}

/// `#[serde(with = "crate::io::codec::big_rows_vec")]`
pub mod big_rows_vec {
    use super::*;
    pub fn serialize<S: Serializer>(v: &[Vec<Vec<BigInt>>], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|r| rows_to_j(r)).collect::<Vec<_>>().serialize(s)
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<Vec<Vec<Vec<BigInt>>>, D::Error> {
        Ok(Vec::<Vec<Vec<JInt>>>::deserialize(d)?
            .into_iter()
            .map(rows_from_j)
            .collect())
    }
}

impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        rows_to_j(&self.to_rows()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = rows_from_j(Vec::<Vec<JInt>>::deserialize(d)?);
        IntMatrix::from_rows(&rows).map_err(D::Error::custom)
    }
}

impl Serialize for UnimodularMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.matrix().serialize(s)
    }
}

impl<'de> Deserialize<'de> for UnimodularMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        UnimodularMatrix::new(IntMatrix::deserialize(d)?).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct LatticeRepr {
    ambient_dim: usize,
    basis: Vec<Vec<JInt>>,
}

impl Serialize for Lattice {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        LatticeRepr {
            ambient_dim: self.ambient_dim(),
            basis: rows_to_j(self.basis()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Lattice {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = LatticeRepr::deserialize(d)?;
        Lattice::from_canonical_basis(r.ambient_dim, rows_from_j(r.basis))
            .map_err(D::Error::custom)
    }
}

impl Serialize for Subtorus {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.lattice().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Subtorus {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Subtorus::from_lattice(Lattice::deserialize(d)?).map_err(D::Error::custom)
    }
}

impl Serialize for PrimitiveCovector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        to_j(self.coords()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for PrimitiveCovector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        PrimitiveCovector::new(from_j(Vec::<JInt>::deserialize(d)?)).map_err(D::Error::custom)
    }
}

impl Serialize for IntPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        to_j(self.coefficients()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntPolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(IntPolynomial::new(from_j(Vec::<JInt>::deserialize(d)?)))
    }
}
