use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// 128-bit run seed. All randomness in a run derives from one of these.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Seed(pub u128);

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid hex seed `{0}` (expected up to 32 hex digits)")]
pub struct SeedParseError(pub String);

// Domain tags keep the different uses of the mixer independent.
pub(crate) const DOMAIN_RANK: u64 = 0x52414e4b;
pub(crate) const DOMAIN_COLOR: u64 = 0x434f4c52;
pub(crate) const DOMAIN_FREEZE: u64 = 0x46525a45;
pub(crate) const DOMAIN_JSTAR: u64 = 0x4a535452;
pub(crate) const DOMAIN_DERIVE: u64 = 0x44525645;
pub(crate) const DOMAIN_STREAM: u64 = 0x5354524d;

impl Seed {
    pub fn from_u64(v: u64) -> Self {
        Seed(v as u128)
    }

    pub fn lo(self) -> u64 {
        self.0 as u64
    }

    pub fn hi(self) -> u64 {
        (self.0 >> 64) as u64
    }

    /// Sub-seed for a labeled purpose. Distinct labels give unrelated streams,
    /// so adding a new consumer never perturbs an existing one.
    pub fn derive(self, label: &str, index: u64) -> Seed {
        let mut words: Vec<u64> = label
            .as_bytes()
            .chunks(8)
            .map(|c| c.iter().fold(0u64, |acc, &b| (acc << 8) | b as u64))
            .collect();
        words.push(label.len() as u64);
        words.push(index);
        let lo = mix(self, DOMAIN_DERIVE, &words);
        words.push(0x5eed);
        let hi = mix(self, DOMAIN_DERIVE, &words);
        Seed(((hi as u128) << 64) | lo as u128)
    }

    /// 32-byte key for seeding a stream cipher RNG.
    pub fn stream_key(self, label: &str) -> [u8; 32] {
        let d = self.derive(label, 0);
        let mut key = [0u8; 32];
        for (i, chunk) in key.chunks_mut(8).enumerate() {
            chunk.copy_from_slice(&mix(d, DOMAIN_STREAM, &[i as u64]).to_le_bytes());
        }
        key
    }
}

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:032x}", self.0)
    }
}

impl fmt::Debug for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Seed({self})")
    }
}

impl FromStr for Seed {
    type Err = SeedParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s.trim().trim_start_matches("0x").trim_start_matches("0X");
        if digits.is_empty() || digits.len() > 32 {
            return Err(SeedParseError(s.to_string()));
        }
        u128::from_str_radix(digits, 16).map(Seed).map_err(|_| SeedParseError(s.to_string()))
    }
}

impl Serialize for Seed {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Seed {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Keyed mixing function over `(seed, domain, words)`. Not cryptographic.
#[inline]
pub(crate) fn mix(seed: Seed, domain: u64, words: &[u64]) -> u64 {
    let mut h = splitmix(seed.lo() ^ domain.wrapping_mul(0xa076_1d64_78bd_642f));
    h = splitmix(h ^ seed.hi());
    for &w in words {
        h = splitmix(h.rotate_left(23) ^ w);
    }
    splitmix(h ^ words.len() as u64)
}
