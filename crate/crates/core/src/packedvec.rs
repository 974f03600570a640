//! Integer vectors over an arbitrary fixed base, packed in mixed radix.
//!
//! Storing `n` values below `b` as independent `ceil(log2 b)`-bit fields
//! wastes up to one bit per value.  Packing `k` values into one radix-`b`
//! number `v_0 + v_1*b + ... + v_{k-1}*b^{k-1}` and storing that number in
//! `ceil(k*log2 b)` bits brings the cost down to `n*log2(b)` bits plus a
//! polylogarithmic additive term, while keeping constant-time reads and
//! writes by division and remainder.

use crate::{Error, Result};
use crate::bits::{read_bits, write_bits};

/// A mutable fixed-length vector of integers in `[0, base)`.
///
/// `k` is chosen as the largest count with `base^k` representable in 64
/// bits; full blocks hold `k` values in `ceil(log2(base^k))` bits and the
/// final partial block of `r` values shrinks to `ceil(log2(base^r))` bits.
#[derive(Clone, Debug)]
pub struct PackedVector {
    len: u64,
    base: u64,
    per_block: u32,
    block_bits: u32,
    /// `powers[j] = base^j`, up to `base^per_block`.
    powers: Vec<u64>,
    words: Vec<u64>,
}

impl PackedVector {
    /// A vector of `len` copies of `fill`.
    pub fn filled(len: u64, base: u64, fill: u64) -> Result<Self> {
        if base == 0 {
            return Err(Error::Validation("packed vector base must be positive".into()));
        }
        if fill >= base {
            return Err(Error::OutOfRange {
                what: "packed value",
                index: fill,
                limit: base,
            });
        }
        let (per_block, powers) = Self::radix_params(base);
        let block_bits = Self::width_of(&powers, per_block);
        let total_bits = Self::total_bits(len, per_block, block_bits, &powers);
        let mut pv = PackedVector {
            len,
            base,
            per_block,
            block_bits,
            powers,
            words: vec![0u64; total_bits.div_ceil(64) as usize],
        };
        if fill != 0 {
            for i in 0..len {
                pv.set(i, fill)?;
            }
        }
        Ok(pv)
    }

    /// Builds from a slice; every value must be below `base`.
    pub fn build(values: &[u64], base: u64) -> Result<Self> {
        let mut pv = Self::filled(values.len() as u64, base, 0)?;
        for (i, &v) in values.iter().enumerate() {
            pv.set(i as u64, v)?;
        }
        Ok(pv)
    }

    /// Largest `k` with `base^k <= u64::MAX`, with the power table.
    fn radix_params(base: u64) -> (u32, Vec<u64>) {
        if base == 1 {
            return (1, vec![1, 1]);
        }
        let mut powers = vec![1u64];
        let mut pow = 1u64;
        while let Some(next) = pow.checked_mul(base) {
            powers.push(next);
            pow = next;
        }
        ((powers.len() - 1) as u32, powers)
    }

    /// Bits needed for a block of `count` values: `ceil(log2(base^count))`.
    fn width_of(powers: &[u64], count: u32) -> u32 {
        let max = powers[count as usize] - 1;
        if max == 0 {
            0
        } else {
            64 - max.leading_zeros()
        }
    }

    fn total_bits(len: u64, per_block: u32, block_bits: u32, powers: &[u64]) -> u64 {
        let full = len / per_block as u64;
        let tail = (len % per_block as u64) as u32;
        full * block_bits as u64 + Self::width_of(powers, tail) as u64
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    #[inline]
    fn block_location(&self, block: u64) -> (u64, u32) {
        let full = self.len / self.per_block as u64;
        if block < full {
            (block * self.block_bits as u64, self.block_bits)
        } else {
            let tail = (self.len % self.per_block as u64) as u32;
            (full * self.block_bits as u64, Self::width_of(&self.powers, tail))
        }
    }

    /// Value at 0-based index `i`.
    pub fn get(&self, i: u64) -> Result<u64> {
        if i >= self.len {
            return Err(Error::OutOfRange {
                what: "vector index",
                index: i,
                limit: self.len,
            });
        }
        if self.base == 1 {
            return Ok(0);
        }
        let (pos, width) = self.block_location(i / self.per_block as u64);
        let block = read_bits(&self.words, pos, width);
        Ok(block / self.powers[(i % self.per_block as u64) as usize] % self.base)
    }

    /// Replaces the value at 0-based index `i`.
    pub fn set(&mut self, i: u64, v: u64) -> Result<()> {
        if i >= self.len {
            return Err(Error::OutOfRange {
                what: "vector index",
                index: i,
                limit: self.len,
            });
        }
        if v >= self.base {
            return Err(Error::OutOfRange {
                what: "packed value",
                index: v,
                limit: self.base,
            });
        }
        if self.base == 1 {
            return Ok(());
        }
        let (pos, width) = self.block_location(i / self.per_block as u64);
        let p = self.powers[(i % self.per_block as u64) as usize];
        let block = read_bits(&self.words, pos, width);
        let old = block / p % self.base;
        write_bits(&mut self.words, pos, width, block - old * p + v * p);
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len).map(move |i| self.get(i).expect("index in range"))
    }

    /// Logical payload size in bits.
    pub fn payload_bits(&self) -> u64 {
        Self::total_bits(self.len, self.per_block, self.block_bits, &self.powers)
    }

    /// Additive overhead above the information-theoretic `n*log2(b)` bits.
    pub fn slack_bits(&self) -> f64 {
        self.payload_bits() as f64 - self.len as f64 * (self.base as f64).log2()
    }

    pub(crate) fn raw_words(&self) -> &[u64] {
        &self.words
    }

    pub(crate) fn per_block(&self) -> u32 {
        self.per_block
    }

    /// Word count a vector of this shape serializes to.
    pub(crate) fn words_needed(len: u64, base: u64) -> Result<u64> {
        if base == 0 {
            return Err(Error::Integrity("packed vector base 0".into()));
        }
        let (per_block, powers) = Self::radix_params(base);
        let block_bits = Self::width_of(&powers, per_block);
        Ok(Self::total_bits(len, per_block, block_bits, &powers).div_ceil(64))
    }

    pub(crate) fn from_raw(len: u64, base: u64, words: Vec<u64>) -> Result<Self> {
        if base == 0 {
            return Err(Error::Integrity("packed vector base 0".into()));
        }
        let (per_block, powers) = Self::radix_params(base);
        let block_bits = Self::width_of(&powers, per_block);
        let total_bits = Self::total_bits(len, per_block, block_bits, &powers);
        if words.len() as u64 != total_bits.div_ceil(64) {
            return Err(Error::Integrity(format!(
                "packed vector has {} words, expected {}",
                words.len(),
                total_bits.div_ceil(64)
            )));
        }
        let pv = PackedVector {
            len,
            base,
            per_block,
            block_bits,
            powers,
            words,
        };
        // Every stored block must be a valid radix-b number, i.e. below
        // base^count for its value count.
        for block in 0..len.div_ceil(pv.per_block as u64) {
            let count = if (block + 1) * pv.per_block as u64 <= len {
                pv.per_block
            } else {
                (len - block * pv.per_block as u64) as u32
            };
            let (pos, width) = pv.block_location(block);
            if count < 64 && read_bits(&pv.words, pos, width) >= pv.powers[count as usize] {
                return Err(Error::Integrity(format!(
                    "packed vector block {block} exceeds radix bound"
                )));
            }
        }
        Ok(pv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fixed_examples() {
        let pv = PackedVector::build(&[4, 0, 2, 2, 1], 5).unwrap();
        assert_eq!(pv.get(0).unwrap(), 4);
        assert_eq!(pv.get(3).unwrap(), 2);
        assert_eq!(pv.iter().collect::<Vec<_>>(), vec![4, 0, 2, 2, 1]);
        assert!(pv.get(5).is_err());
        assert!(PackedVector::build(&[5], 5).is_err());

        // Base 1 stores nothing.
        let pv = PackedVector::build(&[0, 0, 0], 1).unwrap();
        assert_eq!(pv.payload_bits(), 0);
        assert_eq!(pv.get(2).unwrap(), 0);
        assert!(PackedVector::build(&[1], 1).is_err());
    }

    #[test]
    fn set_updates_in_place() {
        let mut pv = PackedVector::filled(100, 7, 3).unwrap();
        pv.set(0, 6).unwrap();
        pv.set(99, 0).unwrap();
        pv.set(50, 1).unwrap();
        assert_eq!(pv.get(0).unwrap(), 6);
        assert_eq!(pv.get(1).unwrap(), 3);
        assert_eq!(pv.get(50).unwrap(), 1);
        assert_eq!(pv.get(99).unwrap(), 0);
        assert!(pv.set(0, 7).is_err());
        assert!(pv.set(100, 0).is_err());
    }

    #[test]
    fn space_is_near_optimal() {
        // 1000 values in base 5: optimal is 1000*log2(5) = 2321.9 bits.
        let pv = PackedVector::filled(1000, 5, 4).unwrap();
        let optimal = 1000.0 * 5f64.log2();
        assert!(pv.payload_bits() as f64 >= optimal);
        assert!(
            pv.slack_bits() <= 64.0 * (1000f64 * 5.0).log2().powi(2),
            "slack {} too large",
            pv.slack_bits()
        );
        // Power-of-two bases degrade to exact fixed width.
        let pv = PackedVector::filled(1000, 256, 17).unwrap();
        assert_eq!(pv.payload_bits(), 8000);
        let pv = PackedVector::filled(63, 2, 1).unwrap();
        assert_eq!(pv.payload_bits(), 63);
    }

    #[test]
    fn tail_block_shrinks() {
        // A single value in a large base takes one value's width, not a full
        // block's.
        let pv = PackedVector::build(&[200], 201).unwrap();
        assert_eq!(pv.payload_bits(), 8);
        // ceil-per-value bound: payload <= n * ceil(log2 b) for all shapes.
        for (n, b) in [(1u64, 201u64), (7, 201), (8, 201), (9, 201), (100, 63), (10, 1023)] {
            let pv = PackedVector::filled(n, b, b - 1).unwrap();
            let per_value = 64 - (b - 1).leading_zeros() as u64;
            assert!(
                pv.payload_bits() <= n * per_value,
                "n={n} b={b}: {} > {}",
                pv.payload_bits(),
                n * per_value
            );
        }
    }

    proptest! {
        #[test]
        fn roundtrip_random(base in 1u64..1000, len in 0usize..400, seed in any::<u64>()) {
            let mut x = seed | 1;
            let mut values = Vec::with_capacity(len);
            for _ in 0..len {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                values.push(x % base);
            }
            let mut pv = PackedVector::build(&values, base).unwrap();
            prop_assert_eq!(pv.iter().collect::<Vec<_>>(), values.clone());
            // Random overwrites stay consistent.
            let mut model = values;
            for step in 0..100u64 {
                if model.is_empty() { break; }
                x = x.wrapping_mul(6364136223846793005).wrapping_add(step);
                let i = (x >> 32) % model.len() as u64;
                let v = x % base;
                pv.set(i, v).unwrap();
                model[i as usize] = v;
            }
            prop_assert_eq!(pv.iter().collect::<Vec<_>>(), model);
        }
    }
}
