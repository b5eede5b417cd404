use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Occupation bitstring over spin orbitals.
///
/// Bit `k` is the occupancy of qubit `k`; spin orbitals are interleaved so
/// qubit `2p` is orbital `p` spin-up and qubit `2p + 1` is orbital `p`
/// spin-down. The text form prints qubit 0 first.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Configuration {
    bits: u64,
    len: u32,
}

pub const MAX_SPIN_ORBITALS: usize = 64;

const ALPHA_MASK: u64 = 0x5555_5555_5555_5555;

impl Configuration {
    pub fn new(bits: u64, len: usize) -> Result<Self> {
        if len > MAX_SPIN_ORBITALS {
            return Err(Error::domain(format!(
                "configuration length {len} exceeds {MAX_SPIN_ORBITALS}"
            )));
        }
        if len < 64 && bits >> len != 0 {
            return Err(Error::domain(format!(
                "bits {bits:#x} set beyond configuration length {len}"
            )));
        }
        Ok(Self { bits, len: len as u32 })
    }

    /// Construct without validation; callers guarantee `bits < 2^len`.
    pub(crate) fn from_bits(bits: u64, len: usize) -> Self {
        debug_assert!(len <= 64 && (len == 64 || bits >> len == 0));
        Self { bits, len: len as u32 }
    }

    /// Configuration with the lowest `n_alpha` spin-up and `n_beta` spin-down
    /// orbitals occupied.
    pub fn hartree_fock(n_orb: usize, n_alpha: usize, n_beta: usize) -> Result<Self> {
        if n_alpha > n_orb || n_beta > n_orb {
            return Err(Error::domain(format!(
                "cannot place {n_alpha} alpha / {n_beta} beta electrons in {n_orb} orbitals"
            )));
        }
        let mut bits = 0u64;
        for p in 0..n_alpha {
            bits |= 1 << (2 * p);
        }
        for p in 0..n_beta {
            bits |= 1 << (2 * p + 1);
        }
        Self::new(bits, 2 * n_orb)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn occupied(&self, qubit: usize) -> bool {
        (self.bits >> qubit) & 1 == 1
    }

    pub fn n_alpha(&self) -> usize {
        (self.bits & ALPHA_MASK).count_ones() as usize
    }

    pub fn n_beta(&self) -> usize {
        (self.bits & !ALPHA_MASK).count_ones() as usize
    }

    pub fn n_electrons(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn in_sector(&self, n_alpha: usize, n_beta: usize) -> bool {
        self.n_alpha() == n_alpha && self.n_beta() == n_beta
    }

    /// Occupied spin-orbital indices in ascending order.
    pub fn occupied_indices(&self) -> impl Iterator<Item = usize> + '_ {
        let mut rest = self.bits;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let k = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(k)
            }
        })
    }

    /// Key whose integer order equals the lexicographic order of the text form.
    fn lex_key(&self) -> u64 {
        if self.len == 0 {
            0
        } else {
            self.bits.reverse_bits() >> (64 - self.len)
        }
    }
}

impl Ord for Configuration {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len
            .cmp(&other.len)
            .then_with(|| self.lex_key().cmp(&other.lex_key()))
    }
}

impl PartialOrd for Configuration {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.len() {
            f.write_str(if self.occupied(k) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Configuration({self})")
    }
}

impl FromStr for Configuration {
    type Err = Error;

    /// Accepts `0`/`1` characters; whitespace is ignored so the spaced form
    /// `1 1 0 0` parses too.
    fn from_str(s: &str) -> Result<Self> {
        let mut bits = 0u64;
        let mut len = 0usize;
        for ch in s.chars().filter(|c| !c.is_whitespace()) {
            match ch {
                '0' => {}
                '1' => {
                    if len < 64 {
                        bits |= 1 << len;
                    }
                }
                other => {
                    return Err(Error::domain(format!(
                        "invalid occupation character {other:?} in {s:?}"
                    )))
                }
            }
            len += 1;
        }
        Self::new(bits, len)
    }
}

impl Serialize for Configuration {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Configuration {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
