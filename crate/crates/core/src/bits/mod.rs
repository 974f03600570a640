//! Bitvectors with rank and select.
//!
//! [`Bitvector`] is the plain variant: one bit per position plus a two-level
//! rank directory and sampled select hints.  [`SparseBitvector`] compresses a
//! vector with few ones down to the monotone sequence of their positions and
//! answers partial rank.  [`MonotoneSequence`] stores a non-decreasing
//! integer sequence in near-optimal space with constant-time access.
//!
//! All public rank/select positions are 1-based: `rank(B, i)` counts inside
//! the prefix `B[1..=i]` and `select(B, k)` returns the 1-based position of
//! the k-th occurrence.  `rank(B, 0) = 0`.

mod mono;
mod sparse;

pub use mono::MonotoneSequence;
pub use sparse::SparseBitvector;

use crate::{Error, Result};

/// Bits per rank block; one relative `u16` count per block.
const BLOCK_BITS: u64 = 256;
const WORDS_PER_BLOCK: usize = (BLOCK_BITS / 64) as usize;
/// Bits per rank superblock; one absolute `u64` count per superblock.
const SUPER_BITS: u64 = 4096;
const BLOCKS_PER_SUPER: usize = (SUPER_BITS / BLOCK_BITS) as usize;
/// Every SELECT_SAMPLE-th occurrence has its position stored verbatim.
const SELECT_SAMPLE: u64 = 4096;

#[inline]
pub(crate) fn mask_low(width: u32) -> u64 {
    if width >= 64 {
        !0
    } else {
        (1u64 << width) - 1
    }
}

/// Reads `width <= 64` bits starting at bit offset `pos` from an LSB-first
/// packed word array.
#[inline]
pub(crate) fn read_bits(words: &[u64], pos: u64, width: u32) -> u64 {
    if width == 0 {
        return 0;
    }
    let w = (pos / 64) as usize;
    let off = (pos % 64) as u32;
    let lo = words[w] >> off;
    if off + width <= 64 {
        lo & mask_low(width)
    } else {
        (lo | (words[w + 1] << (64 - off))) & mask_low(width)
    }
}

/// Writes `width <= 64` bits of `val` at bit offset `pos`.  Bits of `val`
/// above `width` must be zero.
#[inline]
pub(crate) fn write_bits(words: &mut [u64], pos: u64, width: u32, val: u64) {
    if width == 0 {
        return;
    }
    debug_assert!(width == 64 || val < (1u64 << width));
    let w = (pos / 64) as usize;
    let off = (pos % 64) as u32;
    words[w] &= !(mask_low(width) << off);
    words[w] |= val << off;
    if off + width > 64 {
        let spill = off + width - 64;
        words[w + 1] &= !mask_low(spill);
        words[w + 1] |= val >> (64 - off);
    }
}

/// Position (0-based) of the `k`-th set bit of `w`, for `1 <= k <= popcount`.
#[inline]
pub(crate) fn select_in_word(w: u64, k: u64) -> u32 {
    debug_assert!(k >= 1 && k <= w.count_ones() as u64);
    let mut k = k as u32;
    let mut base = 0u32;
    let mut rest = w;
    loop {
        let byte = (rest & 0xFF) as u64;
        let c = byte.count_ones();
        if k <= c {
            let mut b = byte;
            loop {
                let bit = b.trailing_zeros();
                if k == 1 {
                    return base + bit;
                }
                k -= 1;
                b &= b - 1;
            }
        }
        k -= c;
        rest >>= 8;
        base += 8;
    }
}

/// Append-only bit buffer used by builders before freezing into a
/// [`Bitvector`].  Bits are packed LSB-first into `u64` words.
#[derive(Clone, Debug, Default)]
pub struct BitBuf {
    words: Vec<u64>,
    len: u64,
}

impl BitBuf {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: u64) -> Self {
        BitBuf {
            words: Vec::with_capacity(bits.div_ceil(64) as usize),
            len: 0,
        }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, bit: bool) {
        let w = (self.len / 64) as usize;
        if w == self.words.len() {
            self.words.push(0);
        }
        if bit {
            self.words[w] |= 1u64 << (self.len % 64);
        }
        self.len += 1;
    }

    pub fn extend_zeros(&mut self, count: u64) {
        self.len += count;
        let need = self.len.div_ceil(64) as usize;
        self.words.resize(need, 0);
    }

    /// Sets bit `i` (0-based); `i` must be below the current length.
    pub fn set(&mut self, i: u64, bit: bool) {
        assert!(i < self.len, "bit {i} out of bounds for BitBuf of {}", self.len);
        let mask = 1u64 << (i % 64);
        if bit {
            self.words[(i / 64) as usize] |= mask;
        } else {
            self.words[(i / 64) as usize] &= !mask;
        }
    }

    pub fn get(&self, i: u64) -> bool {
        assert!(i < self.len);
        self.words[(i / 64) as usize] >> (i % 64) & 1 == 1
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn freeze(self) -> Bitvector {
        Bitvector::from_words(self.words, self.len)
    }
}

impl FromIterator<bool> for BitBuf {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut b = BitBuf::new();
        for bit in iter {
            b.push(bit);
        }
        b
    }
}

/// Plain bitvector with constant-time rank and near-constant-time select.
///
/// The rank directory stores one absolute count per 4096-bit superblock and
/// one relative count per 256-bit block; select keeps the position of every
/// 4096-th occurrence of each bit value and finishes with a directory search
/// plus an in-word scan.  Directory overhead is about 11% of the payload.
#[derive(Clone, Debug)]
pub struct Bitvector {
    len: u64,
    ones: u64,
    words: Vec<u64>,
    super_ranks: Vec<u64>,
    block_ranks: Vec<u16>,
    select1_samples: Vec<u64>,
    select0_samples: Vec<u64>,
}

impl Bitvector {
    /// Builds from words packed LSB-first; bits beyond `len` are cleared.
    pub fn from_words(mut words: Vec<u64>, len: u64) -> Self {
        let need = len.div_ceil(64) as usize;
        assert!(words.len() >= need, "word array shorter than {len} bits");
        words.truncate(need);
        if len % 64 != 0 {
            let last = words.len() - 1;
            words[last] &= mask_low((len % 64) as u32);
        }

        let n_blocks = (len / BLOCK_BITS) as usize + 1;
        let n_supers = (len / SUPER_BITS) as usize + 1;
        let mut super_ranks = vec![0u64; n_supers];
        let mut block_ranks = vec![0u16; n_blocks];
        let mut select1_samples = Vec::new();
        let mut select0_samples = Vec::new();

        let mut ones = 0u64;
        let mut super_base = 0u64;
        for b in 0..n_blocks {
            if b % BLOCKS_PER_SUPER == 0 {
                super_base = ones;
                super_ranks[b / BLOCKS_PER_SUPER] = ones;
            }
            block_ranks[b] = (ones - super_base) as u16;
            let w0 = b * WORDS_PER_BLOCK;
            for w in w0..(w0 + WORDS_PER_BLOCK).min(words.len()) {
                let word = words[w];
                let base = (w as u64) * 64;
                let valid = (len - base).min(64) as u32;
                let c1 = word.count_ones() as u64;
                // Record sampled positions of ones: the (j*SAMPLE + 1)-th one
                // for every j whose target falls inside this word.
                let mut target = (ones / SELECT_SAMPLE) * SELECT_SAMPLE + 1;
                if target <= ones {
                    target += SELECT_SAMPLE;
                }
                while target <= ones + c1 {
                    select1_samples.push(base + select_in_word(word, target - ones) as u64);
                    target += SELECT_SAMPLE;
                }
                // Same for zeros, masking the padding of the final word.
                let zword = !word & mask_low(valid);
                let c0 = zword.count_ones() as u64;
                let zeros = base - ones;
                let mut ztarget = (zeros / SELECT_SAMPLE) * SELECT_SAMPLE + 1;
                if ztarget <= zeros {
                    ztarget += SELECT_SAMPLE;
                }
                while ztarget <= zeros + c0 {
                    select0_samples.push(base + select_in_word(zword, ztarget - zeros) as u64);
                    ztarget += SELECT_SAMPLE;
                }
                ones += c1;
            }
        }

        Bitvector {
            len,
            ones,
            words,
            super_ranks,
            block_ranks,
            select1_samples,
            select0_samples,
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        bits.iter().copied().collect::<BitBuf>().freeze()
    }

    pub fn empty() -> Self {
        Bitvector::from_words(Vec::new(), 0)
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn count_ones(&self) -> u64 {
        self.ones
    }

    pub fn count_zeros(&self) -> u64 {
        self.len - self.ones
    }

    /// Logical payload size in bits, excluding directories.
    pub fn payload_bits(&self) -> u64 {
        self.len
    }

    /// Serialized directory size in bits (rank blocks plus select samples).
    pub fn directory_bits(&self) -> u64 {
        (self.super_ranks.len() as u64) * 64
            + (self.block_ranks.len() as u64) * 16
            + ((self.select1_samples.len() + self.select0_samples.len()) as u64) * 64
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    /// Bit at 1-based position `i`.
    pub fn get(&self, i: u64) -> Result<bool> {
        if i == 0 || i > self.len {
            return Err(Error::OutOfRange {
                what: "bit position",
                index: i,
                limit: self.len,
            });
        }
        Ok(self.get0(i - 1))
    }

    #[inline]
    pub(crate) fn get0(&self, i: u64) -> bool {
        self.words[(i / 64) as usize] >> (i % 64) & 1 == 1
    }

    /// Number of `bit`-valued positions in the prefix `B[1..=i]`; `i` may be
    /// 0 (empty prefix) up to `len`.
    pub fn rank(&self, bit: bool, i: u64) -> Result<u64> {
        if i > self.len {
            return Err(Error::OutOfRange {
                what: "rank position",
                index: i,
                limit: self.len,
            });
        }
        let r1 = self.rank1_prefix(i);
        Ok(if bit { r1 } else { i - r1 })
    }

    pub fn rank1(&self, i: u64) -> Result<u64> {
        self.rank(true, i)
    }

    pub fn rank0(&self, i: u64) -> Result<u64> {
        self.rank(false, i)
    }

    #[inline]
    pub(crate) fn rank1_prefix(&self, i: u64) -> u64 {
        let sb = (i / SUPER_BITS) as usize;
        let bl = (i / BLOCK_BITS) as usize;
        let mut r = self.super_ranks[sb] + self.block_ranks[bl] as u64;
        let last_word = (i / 64) as usize;
        for w in bl * WORDS_PER_BLOCK..last_word {
            r += self.words[w].count_ones() as u64;
        }
        let rem = (i % 64) as u32;
        if rem > 0 {
            r += (self.words[last_word] & mask_low(rem)).count_ones() as u64;
        }
        r
    }

    /// 1-based position of the `k`-th `bit`-valued position, `1 <= k <=
    /// count(bit)`.
    pub fn select(&self, bit: bool, k: u64) -> Result<u64> {
        let total = if bit { self.ones } else { self.len - self.ones };
        if k == 0 || k > total {
            return Err(Error::OutOfRange {
                what: "select rank",
                index: k,
                limit: total,
            });
        }
        Ok(if bit { self.select1_unchecked(k) } else { self.select0_unchecked(k) } + 1)
    }

    pub fn select1(&self, k: u64) -> Result<u64> {
        self.select(true, k)
    }

    pub fn select0(&self, k: u64) -> Result<u64> {
        self.select(false, k)
    }

    /// 0-based position of the k-th one; k is in range.
    fn select1_unchecked(&self, k: u64) -> u64 {
        let sample = ((k - 1) / SELECT_SAMPLE) as usize;
        let lo = (self.select1_samples[sample] / SUPER_BITS) as usize;
        let hi = if sample + 1 < self.select1_samples.len() {
            (self.select1_samples[sample + 1] / SUPER_BITS) as usize + 1
        } else {
            self.super_ranks.len()
        };
        // Last superblock index s in [lo, hi) with super_ranks[s] < k.
        let s = lo + self.super_ranks[lo..hi].partition_point(|&r| r < k) - 1;
        let mut rem = k - self.super_ranks[s];

        let b0 = s * BLOCKS_PER_SUPER;
        let b1 = (b0 + BLOCKS_PER_SUPER).min(self.block_ranks.len());
        let mut b = b0;
        while b + 1 < b1 && (self.block_ranks[b + 1] as u64) < rem {
            b += 1;
        }
        rem -= self.block_ranks[b] as u64;

        let mut w = b * WORDS_PER_BLOCK;
        loop {
            let c = self.words[w].count_ones() as u64;
            if rem <= c {
                return (w as u64) * 64 + select_in_word(self.words[w], rem) as u64;
            }
            rem -= c;
            w += 1;
        }
    }

    /// 0-based position of the k-th zero; k is in range.
    fn select0_unchecked(&self, k: u64) -> u64 {
        let zeros_before_super = |s: usize| (s as u64) * SUPER_BITS - self.super_ranks[s];
        let sample = ((k - 1) / SELECT_SAMPLE) as usize;
        let lo = (self.select0_samples[sample] / SUPER_BITS) as usize;
        let hi = if sample + 1 < self.select0_samples.len() {
            (self.select0_samples[sample + 1] / SUPER_BITS) as usize + 1
        } else {
            self.super_ranks.len()
        };
        // Last superblock s in [lo, hi) with zeros_before_super(s) < k.
        let mut a = lo;
        let mut b = hi;
        while a < b {
            let mid = (a + b) / 2;
            if zeros_before_super(mid) < k {
                a = mid + 1;
            } else {
                b = mid;
            }
        }
        let s = a - 1;
        let mut rem = k - zeros_before_super(s);

        let b0 = s * BLOCKS_PER_SUPER;
        let b1 = (b0 + BLOCKS_PER_SUPER).min(self.block_ranks.len());
        let zeros_in_block_prefix =
            |b: usize| ((b - b0) as u64) * BLOCK_BITS - self.block_ranks[b] as u64;
        let mut b = b0;
        while b + 1 < b1 && zeros_in_block_prefix(b + 1) < rem {
            b += 1;
        }
        rem -= zeros_in_block_prefix(b);

        let mut w = b * WORDS_PER_BLOCK;
        loop {
            let base = (w as u64) * 64;
            let valid = (self.len - base).min(64) as u32;
            let zword = !self.words[w] & mask_low(valid);
            let c = zword.count_ones() as u64;
            if rem <= c {
                return base + select_in_word(zword, rem) as u64;
            }
            rem -= c;
            w += 1;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get0(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bits_of(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    /// Linear-scan reference for rank.
    fn naive_rank(bits: &[bool], bit: bool, i: u64) -> u64 {
        bits[..i as usize].iter().filter(|&&b| b == bit).count() as u64
    }

    /// Linear-scan reference for select: 1-based position of the k-th `bit`.
    fn naive_select(bits: &[bool], bit: bool, k: u64) -> Option<u64> {
        let mut seen = 0;
        for (i, &b) in bits.iter().enumerate() {
            if b == bit {
                seen += 1;
                if seen == k {
                    return Some(i as u64 + 1);
                }
            }
        }
        None
    }

    #[test]
    fn fixed_examples() {
        let bits = bits_of("10110");
        let bv = Bitvector::from_bools(&bits);
        assert_eq!(bv.rank1(3).unwrap(), 2);
        assert_eq!(bv.rank1(5).unwrap(), 3);
        assert_eq!(bv.rank0(5).unwrap(), 2);
        assert_eq!(bv.rank1(0).unwrap(), 0);
        assert_eq!(bv.select1(3).unwrap(), 4);
        // Zeros sit at positions 2 and 5, so the second zero is at 5.
        assert_eq!(naive_select(&bits, false, 2), Some(5));
        assert_eq!(bv.select0(2).unwrap(), 5);
        assert!(bv.select1(4).is_err());
        assert!(bv.select0(3).is_err());
        assert!(bv.rank1(6).is_err());
        assert!(bv.get(0).is_err());
        assert_eq!(bv.get(1).unwrap(), true);
        assert_eq!(bv.get(5).unwrap(), false);
    }

    #[test]
    fn empty_vector() {
        let bv = Bitvector::empty();
        assert_eq!(bv.len(), 0);
        assert_eq!(bv.rank1(0).unwrap(), 0);
        assert!(bv.select1(1).is_err());
        assert!(bv.get(1).is_err());
    }

    #[test]
    fn all_ones_and_all_zeros() {
        for len in [1u64, 63, 64, 65, 256, 300, 4096, 5000] {
            let ones = Bitvector::from_bools(&vec![true; len as usize]);
            let zeros = Bitvector::from_bools(&vec![false; len as usize]);
            assert_eq!(ones.rank1(len).unwrap(), len);
            assert_eq!(zeros.rank0(len).unwrap(), len);
            for k in [1, len / 2 + 1, len] {
                assert_eq!(ones.select1(k).unwrap(), k);
                assert_eq!(zeros.select0(k).unwrap(), k);
            }
            assert!(ones.select0(1).is_err());
            assert!(zeros.select1(1).is_err());
        }
    }

    #[test]
    fn bitbuf_set_and_freeze() {
        let mut buf = BitBuf::new();
        buf.extend_zeros(130);
        buf.set(0, true);
        buf.set(64, true);
        buf.set(129, true);
        buf.set(64, false);
        let bv = buf.freeze();
        assert_eq!(bv.count_ones(), 2);
        assert_eq!(bv.select1(1).unwrap(), 1);
        assert_eq!(bv.select1(2).unwrap(), 130);
    }

    #[test]
    fn read_write_bits_roundtrip() {
        let mut words = vec![0u64; 4];
        write_bits(&mut words, 0, 7, 0x55);
        write_bits(&mut words, 7, 64, 0xDEAD_BEEF_CAFE_F00D);
        write_bits(&mut words, 71, 13, 0x1ABC);
        write_bits(&mut words, 100, 64, u64::MAX);
        assert_eq!(read_bits(&words, 0, 7), 0x55);
        assert_eq!(read_bits(&words, 7, 64), 0xDEAD_BEEF_CAFE_F00D);
        assert_eq!(read_bits(&words, 71, 13), 0x1ABC);
        assert_eq!(read_bits(&words, 100, 64), u64::MAX);
        // Overwrite in place.
        write_bits(&mut words, 7, 64, 42);
        assert_eq!(read_bits(&words, 7, 64), 42);
        assert_eq!(read_bits(&words, 0, 7), 0x55);
        assert_eq!(read_bits(&words, 71, 13), 0x1ABC);
    }

    proptest! {
        #[test]
        fn rank_select_match_linear_scan(bits in proptest::collection::vec(any::<bool>(), 0..2048)) {
            let bv = Bitvector::from_bools(&bits);
            let n = bits.len() as u64;
            prop_assert_eq!(bv.count_ones(), naive_rank(&bits, true, n));
            for i in 0..=n {
                prop_assert_eq!(bv.rank1(i).unwrap(), naive_rank(&bits, true, i));
                prop_assert_eq!(bv.rank0(i).unwrap(), naive_rank(&bits, false, i));
            }
            for k in 1..=bv.count_ones() {
                let p = bv.select1(k).unwrap();
                prop_assert_eq!(Some(p), naive_select(&bits, true, k));
                prop_assert_eq!(bv.rank1(p).unwrap(), k);
            }
            for k in 1..=bv.count_zeros() {
                let p = bv.select0(k).unwrap();
                prop_assert_eq!(Some(p), naive_select(&bits, false, k));
                prop_assert_eq!(bv.rank0(p).unwrap(), k);
            }
        }

        #[test]
        fn sparse_density_select(len in 1usize..20000, seed in any::<u64>()) {
            // Mostly-zero vectors exercise the select-sample skip logic.
            let mut bits = vec![false; len];
            let mut x = seed | 1;
            for b in bits.iter_mut() {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                *b = (x >> 60) == 0;
            }
            let bv = Bitvector::from_bools(&bits);
            for k in 1..=bv.count_ones() {
                prop_assert_eq!(Some(bv.select1(k).unwrap()), naive_select(&bits, true, k));
            }
            let step = (bv.count_zeros() / 37).max(1);
            let mut k = 1;
            while k <= bv.count_zeros() {
                prop_assert_eq!(Some(bv.select0(k).unwrap()), naive_select(&bits, false, k));
                k += step;
            }
        }
    }
}
