//! Participant identities and positions on the circle.

use alloc::format;
use core::fmt;
use core::str::FromStr;

use crate::error::Error;

/// A participant `P1..Pn`. Ids are 1-based and arithmetic wraps modulo `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartyId(pub u32);

impl PartyId {
    pub fn new(id: u32) -> Self {
        PartyId(id)
    }

    /// Zero-based slot, for indexing per-party vectors.
    pub fn slot(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_slot(slot: usize) -> Self {
        PartyId(slot as u32 + 1)
    }

    /// The party `k` steps further along the circle of `n` parties.
    pub fn offset(self, k: usize, n: usize) -> Self {
        Self::from_slot((self.slot() + k) % n)
    }

    /// The party `k` steps back along the circle.
    pub fn back(self, k: usize, n: usize) -> Self {
        Self::from_slot((self.slot() + n - k % n) % n)
    }

    pub fn next(self, n: usize) -> Self {
        self.offset(1, n)
    }

    pub fn prev(self, n: usize) -> Self {
        self.back(1, n)
    }

    /// Number of forward steps from `self` to `other`.
    pub fn distance_to(self, other: PartyId, n: usize) -> usize {
        (other.slot() + n - self.slot()) % n
    }

    /// Iterates `P1..Pn`.
    pub fn all(n: usize) -> impl Iterator<Item = PartyId> {
        (0..n).map(PartyId::from_slot)
    }
}

impl fmt::Display for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.0)
    }
}

impl FromStr for PartyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s.strip_prefix('P').unwrap_or(s);
        match digits.parse::<u32>() {
            Ok(id) if id >= 1 => Ok(PartyId(id)),
            _ => Err(Error::Parse(format!("bad party id {s:?}"))),
        }
    }
}

/// A node on the message bus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Endpoint {
    Server,
    Party(PartyId),
}

impl Endpoint {
    pub fn party(self) -> Option<PartyId> {
        match self {
            Endpoint::Party(p) => Some(p),
            Endpoint::Server => None,
        }
    }
}

impl From<PartyId> for Endpoint {
    fn from(p: PartyId) -> Self {
        Endpoint::Party(p)
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Server => f.write_str("server"),
            Endpoint::Party(p) => p.fmt(f),
        }
    }
}

impl FromStr for Endpoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("server") {
            Ok(Endpoint::Server)
        } else {
            s.parse().map(Endpoint::Party)
        }
    }
}

macro_rules! serde_via_string {
    ($ty:ty) => {
        impl ::serde::Serialize for $ty {
            fn serialize<S: ::serde::Serializer>(&self, s: S) -> ::core::result::Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> ::serde::Deserialize<'de> for $ty {
            fn deserialize<D: ::serde::Deserializer<'de>>(d: D) -> ::core::result::Result<Self, D::Error> {
                let raw = <::alloc::string::String as ::serde::Deserialize>::deserialize(d)?;
                raw.parse().map_err(|e: $crate::Error| {
                    <D::Error as ::serde::de::Error>::custom(::alloc::string::ToString::to_string(&e))
                })
            }
        }
    };
}

pub(crate) use serde_via_string;

serde_via_string!(PartyId);
serde_via_string!(Endpoint);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_arithmetic_wraps() {
        let p1 = PartyId(1);
        assert_eq!(p1.prev(3), PartyId(3));
        assert_eq!(p1.offset(4, 3), PartyId(2));
        assert_eq!(PartyId(3).next(3), PartyId(1));
        assert_eq!(PartyId(3).back(2, 3), PartyId(1));
        assert_eq!(PartyId(3).distance_to(PartyId(2), 4), 3);
    }

    #[test]
    fn endpoint_parse_roundtrip() {
        for e in [Endpoint::Server, Endpoint::Party(PartyId(7))] {
            assert_eq!(e.to_string().parse::<Endpoint>().unwrap(), e);
        }
        assert!("P0".parse::<PartyId>().is_err());
    }
}
