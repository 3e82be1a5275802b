//! Classical bit strings: private keys, measurement records, derived keys.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Index;
use core::str::FromStr;

use rand::Rng;

use crate::error::Error;
use crate::party::serde_via_string;

/// An ordered bit string, rendered most-significant (first) bit first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Bits(Vec<bool>);

impl Bits {
    pub fn new(bits: Vec<bool>) -> Self {
        Bits(bits)
    }

    pub fn zeros(len: usize) -> Self {
        Bits(alloc::vec![false; len])
    }

    pub fn ones(len: usize) -> Self {
        Bits(alloc::vec![true; len])
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Bits((0..len).map(|_| rng.random_bool(0.5)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.0.get(i).copied()
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    /// Bitwise XOR of two equal-length strings.
    pub fn xor(&self, other: &Bits) -> Result<Bits, Error> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch { expected: self.len(), found: other.len() });
        }
        Ok(Bits(self.iter().zip(other.iter()).map(|(a, b)| a ^ b).collect()))
    }

    /// The bits at the given positions, in the order given.
    pub fn select(&self, positions: &[usize]) -> Option<Bits> {
        positions.iter().map(|&p| self.get(p)).collect::<Option<Vec<_>>>().map(Bits)
    }
}

impl Index<usize> for Bits {
    type Output = bool;

    fn index(&self, i: usize) -> &bool {
        &self.0[i]
    }
}

impl FromIterator<bool> for Bits {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Bits(iter.into_iter().collect())
    }
}

impl From<Vec<bool>> for Bits {
    fn from(v: Vec<bool>) -> Self {
        Bits(v)
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Bits {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Parse(format!("bit string {s:?} contains {c:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Bits)
    }
}

serde_via_string!(Bits);

/// XOR of any number of equal-length keys. An empty list yields the empty string.
pub fn xor_keys(keys: &[Bits]) -> Result<Bits, Error> {
    let Some((first, rest)) = keys.split_first() else {
        return Ok(Bits::default());
    };
    rest.iter().try_fold(first.clone(), |acc, k| acc.xor(k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(s: &str) -> Bits {
        s.parse().unwrap()
    }

    #[test]
    fn xor_of_worked_examples() {
        assert_eq!(xor_keys(&[b("000"), b("111"), b("110")]).unwrap(), b("001"));
        assert_eq!(xor_keys(&[b("1000"), b("0101"), b("1001")]).unwrap(), b("0100"));
        assert_eq!(xor_keys(&[b("1011"), b("0000")]).unwrap(), b("1011"));
    }

    #[test]
    fn xor_rejects_ragged_input() {
        assert_eq!(xor_keys(&[b("01"), b("011")]), Err(Error::LengthMismatch { expected: 2, found: 3 }));
    }

    #[test]
    fn parse_and_render() {
        assert_eq!(b("0110").to_string(), "0110");
        assert!("01x".parse::<Bits>().is_err());
        assert_eq!(b("").len(), 0);
    }
}
