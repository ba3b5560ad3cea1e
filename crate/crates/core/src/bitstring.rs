use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A candidate string `s = s_1 ... s_D`.
///
/// Bit `i` (0-based) is `s_{i+1}`; in integer form `s_1` is the most
/// significant bit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bitstring(Vec<bool>);

impl Bitstring {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn zeros(d: usize) -> Self {
        Self(vec![false; d])
    }

    pub fn ones(d: usize) -> Self {
        Self(vec![true; d])
    }

    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        Self((0..d).map(|_| rng.random::<bool>()).collect())
    }

    /// Inverse of [`Bitstring::index`]; `d` must be at most 64.
    pub fn from_index(d: usize, index: u64) -> Self {
        Self((0..d).map(|i| index >> (d - 1 - i) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, v: bool) {
        self.0[i] = v;
    }

    pub fn flip_in_place(&mut self, i: usize) {
        self.0[i] = !self.0[i];
    }

    pub fn flipped(&self, i: usize) -> Self {
        let mut s = self.clone();
        s.flip_in_place(i);
        s
    }

    pub fn index(&self) -> u64 {
        self.0.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn hamming(&self, other: &Bitstring) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Integer form in lower-case hex, zero-padded to `ceil(D/4)` digits.
    pub fn to_hex(&self) -> String {
        let width = self.0.len().div_ceil(4).max(1);
        if self.0.len() <= 64 {
            return format!("{:0width$x}", self.index());
        }
        let pad = (4 - self.0.len() % 4) % 4;
        let bits: Vec<bool> = std::iter::repeat_n(false, pad).chain(self.0.iter().copied()).collect();
        bits.chunks(4)
            .map(|c| {
                let v = c.iter().fold(0u32, |a, &b| (a << 1) | b as u32);
                char::from_digit(v, 16).unwrap()
            })
            .collect()
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Bitstring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("bad bit '{other}' in '{s}'"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Bitstring)
    }
}

impl Serialize for Bitstring {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Bitstring {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let s: Bitstring = "1011010111".parse().unwrap();
        assert_eq!(s.index(), 0b1011010111);
        assert_eq!(Bitstring::from_index(10, s.index()), s);
        assert_eq!(s.to_hex(), "2d7");
    }

    #[test]
    fn long_hex_matches_short_path() {
        let s = Bitstring::new((0..70).map(|i| i % 3 == 0).collect());
        let tail = Bitstring::new(s.bits()[6..].to_vec());
        assert!(s.to_hex().ends_with(&tail.to_hex()));
        assert_eq!(s.to_hex().len(), 18);
    }

    #[test]
    fn serde_as_string() {
        let s: Bitstring = "0110".parse().unwrap();
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, "\"0110\"");
        assert_eq!(serde_json::from_str::<Bitstring>(&j).unwrap(), s);
    }
}
