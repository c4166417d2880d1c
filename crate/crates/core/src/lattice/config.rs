use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Which graph of a domain a bond configuration lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GraphTag {
    Primal,
    StrongDual,
    WeakDual,
}

/// Subset of the edges of a graph, stored as a bit set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BondConfig {
    tag: GraphTag,
    len: usize,
    bits: Vec<u64>,
}

impl BondConfig {
    pub fn empty(tag: GraphTag, len: usize) -> Self {
        BondConfig {
            tag,
            len,
            bits: vec![0; len.div_ceil(64)],
        }
    }

    pub fn full(tag: GraphTag, len: usize) -> Self {
        let mut c = Self::empty(tag, len);
        for e in 0..len {
            c.set(e, true);
        }
        c
    }

    pub fn from_bools(tag: GraphTag, open: &[bool]) -> Self {
        let mut c = Self::empty(tag, open.len());
        for (e, &b) in open.iter().enumerate() {
            if b {
                c.set(e, true);
            }
        }
        c
    }

    /// Low `len` bits of `mask` (requires `len <= 64`).
    pub fn from_mask(tag: GraphTag, len: usize, mask: u64) -> Self {
        debug_assert!(len <= 64);
        let mut c = Self::empty(tag, len);
        if len > 0 {
            c.bits[0] = if len == 64 { mask } else { mask & ((1u64 << len) - 1) };
        }
        c
    }

    pub fn to_mask(&self) -> u64 {
        debug_assert!(self.len <= 64);
        self.bits.first().copied().unwrap_or(0)
    }

    pub fn tag(&self) -> GraphTag {
        self.tag
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, e: usize) -> bool {
        (self.bits[e >> 6] >> (e & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, e: usize, open: bool) {
        let w = &mut self.bits[e >> 6];
        if open {
            *w |= 1 << (e & 63);
        } else {
            *w &= !(1 << (e & 63));
        }
    }

    pub fn clear(&mut self) {
        self.bits.iter_mut().for_each(|w| *w = 0);
    }

    pub fn count_open(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn open_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&e| self.get(e))
    }

    /// Edgewise inclusion `self ⊆ other`.
    pub fn is_subset(&self, other: &BondConfig) -> bool {
        self.len == other.len && self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    pub fn union(&self, other: &BondConfig) -> BondConfig {
        let mut c = self.clone();
        c.bits.iter_mut().zip(&other.bits).for_each(|(a, b)| *a |= b);
        c
    }

    pub fn intersection(&self, other: &BondConfig) -> BondConfig {
        let mut c = self.clone();
        c.bits.iter_mut().zip(&other.bits).for_each(|(a, b)| *a &= b);
        c
    }

    /// Lowercase hex of the bit string, edge 0 first, four edges per digit.
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.len.div_ceil(4));
        for chunk in 0..self.len.div_ceil(4) {
            let mut d = 0u32;
            for k in 0..4 {
                let e = 4 * chunk + k;
                if e < self.len && self.get(e) {
                    d |= 1 << k;
                }
            }
            s.push(char::from_digit(d, 16).unwrap());
        }
        s
    }

    pub fn from_hex(tag: GraphTag, len: usize, hex: &str) -> Result<Self> {
        if hex.len() != len.div_ceil(4) {
            return invalid("hex string has the wrong length");
        }
        let mut c = Self::empty(tag, len);
        for (chunk, ch) in hex.chars().enumerate() {
            let d = match ch.to_digit(16) {
                Some(d) => d,
                None => return invalid("bad hex digit"),
            };
            for k in 0..4 {
                let e = 4 * chunk + k;
                if d >> k & 1 == 1 {
                    if e >= len {
                        return invalid("hex string sets bits past the end");
                    }
                    c.set(e, true);
                }
            }
        }
        Ok(c)
    }
}

/// Spin configuration with values in {-1, +1}.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpinConfig {
    spins: Vec<i8>,
}

impl SpinConfig {
    pub fn all_plus(n: usize) -> Self {
        SpinConfig { spins: vec![1; n] }
    }

    pub fn from_vec(spins: Vec<i8>) -> Result<Self> {
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return invalid("spins must be +1 or -1");
        }
        Ok(SpinConfig { spins })
    }

    /// Bit v set means spin v is -1.
    pub fn from_mask(n: usize, minus: u64) -> Self {
        SpinConfig {
            spins: (0..n).map(|v| if minus >> v & 1 == 1 { -1 } else { 1 }).collect(),
        }
    }

    pub fn to_mask(&self) -> u64 {
        self.spins
            .iter()
            .enumerate()
            .fold(0, |m, (v, &s)| if s < 0 { m | 1 << v } else { m })
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    #[inline]
    pub fn get(&self, v: usize) -> i8 {
        self.spins[v]
    }

    #[inline]
    pub fn set(&mut self, v: usize, s: i8) {
        debug_assert!(s == 1 || s == -1);
        self.spins[v] = s;
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.spins
    }

    pub fn as_mut_slice(&mut self) -> &mut [i8] {
        &mut self.spins
    }

    /// Pointwise product.
    pub fn product(&self, other: &SpinConfig) -> SpinConfig {
        SpinConfig {
            spins: self.spins.iter().zip(&other.spins).map(|(a, b)| a * b).collect(),
        }
    }
}

/// Projection of a current onto the edges where it is odd and where it is even and positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CurrentTrace {
    pub odd: BondConfig,
    pub even: BondConfig,
}

impl CurrentTrace {
    pub fn empty(tag: GraphTag, len: usize) -> Self {
        CurrentTrace {
            odd: BondConfig::empty(tag, len),
            even: BondConfig::empty(tag, len),
        }
    }

    /// Support `odd ∪ even`.
    pub fn support(&self) -> BondConfig {
        self.odd.union(&self.even)
    }

    /// Parity addition of two traces: odd + odd is even, even + anything non-zero is non-zero.
    pub fn add(&self, other: &CurrentTrace) -> CurrentTrace {
        let mut out = CurrentTrace::empty(self.odd.tag(), self.odd.len());
        for e in 0..self.odd.len() {
            let odd = self.odd.get(e) != other.odd.get(e);
            let nonzero = self.odd.get(e) || self.even.get(e) || other.odd.get(e) || other.even.get(e);
            out.odd.set(e, odd);
            out.even.set(e, nonzero && !odd);
        }
        out
    }
}
