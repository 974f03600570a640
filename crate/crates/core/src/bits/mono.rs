//! Monotone integer sequences in near-optimal space.

use crate::bits::{mask_low, read_bits, write_bits, BitBuf, Bitvector};
use crate::{Error, Result};

/// A non-decreasing sequence of `n` integers drawn from `[0, u)`.
///
/// Each value is split into a low part of `w = floor(log2(u/n))` bits, stored
/// verbatim, and a high part stored in unary in a bitvector: for each bucket
/// of high value, its member count in ones followed by a terminating zero.
/// Total payload is within `2n + n*ceil(log2(u/n)) + O(1)` bits of optimal,
/// with constant-time access and logarithmic rank through the positions of
/// ones and zeros in the high part.
///
/// Access positions are 0-based; `rank(v)` counts stored values strictly
/// below `v` and accepts any `v <= u`.
#[derive(Clone, Debug)]
pub struct MonotoneSequence {
    len: u64,
    universe: u64,
    low_width: u32,
    high: Bitvector,
    low: Vec<u64>,
}

impl MonotoneSequence {
    /// Builds from a sorted slice.  Rejects decreasing neighbors and values
    /// at or above `universe`.
    pub fn build(values: &[u64], universe: u64) -> Result<Self> {
        for (i, &v) in values.iter().enumerate() {
            if v >= universe {
                return Err(Error::Validation(format!(
                    "monotone value {v} at index {i} not below universe {universe}"
                )));
            }
            if i > 0 && values[i - 1] > v {
                return Err(Error::Validation(format!(
                    "sequence decreases at index {i}: {} > {v}",
                    values[i - 1]
                )));
            }
        }
        let n = values.len() as u64;
        if n == 0 {
            return Ok(MonotoneSequence {
                len: 0,
                universe,
                low_width: 0,
                high: Bitvector::empty(),
                low: Vec::new(),
            });
        }
        let low_width = Self::width_for(n, universe);
        let buckets = (universe >> low_width) + 1;

        let mut high = BitBuf::with_capacity(n + buckets);
        let mut bucket = 0u64;
        for &v in values {
            let h = v >> low_width;
            while bucket < h {
                high.push(false);
                bucket += 1;
            }
            high.push(true);
        }
        while bucket < buckets {
            high.push(false);
            bucket += 1;
        }
        debug_assert_eq!(high.len(), n + buckets);

        let mut low = vec![0u64; ((n * low_width as u64).div_ceil(64)) as usize];
        for (i, &v) in values.iter().enumerate() {
            write_bits(&mut low, i as u64 * low_width as u64, low_width, v & mask_low(low_width));
        }

        Ok(MonotoneSequence {
            len: n,
            universe,
            low_width,
            high: high.freeze(),
            low,
        })
    }

    pub(crate) fn width_for(n: u64, universe: u64) -> u32 {
        if n == 0 || universe / n < 2 {
            0
        } else {
            (universe / n).ilog2()
        }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn universe(&self) -> u64 {
        self.universe
    }

    pub fn low_width(&self) -> u32 {
        self.low_width
    }

    /// Value at 0-based index `i`.
    pub fn get(&self, i: u64) -> Result<u64> {
        if i >= self.len {
            return Err(Error::OutOfRange {
                what: "sequence index",
                index: i,
                limit: self.len,
            });
        }
        let p = self.high.select1(i + 1)?;
        let bucket = (p - 1) - i;
        Ok(bucket << self.low_width | read_bits(&self.low, i * self.low_width as u64, self.low_width))
    }

    /// Number of stored values strictly below `v`, for any `v <= universe`.
    pub fn rank(&self, v: u64) -> Result<u64> {
        if v > self.universe {
            return Err(Error::OutOfRange {
                what: "rank value",
                index: v,
                limit: self.universe,
            });
        }
        if self.len == 0 {
            return Ok(0);
        }
        let hv = v >> self.low_width;
        let start = if hv == 0 {
            0
        } else {
            self.high.select0(hv)? - hv
        };
        let end = self.high.select0(hv + 1)? - (hv + 1);
        if self.low_width == 0 {
            return Ok(start);
        }
        // Values in [start, end) share the high part hv; binary search their
        // sorted low parts.
        let v_low = v & mask_low(self.low_width);
        let mut a = start;
        let mut b = end;
        while a < b {
            let mid = (a + b) / 2;
            if read_bits(&self.low, mid * self.low_width as u64, self.low_width) < v_low {
                a = mid + 1;
            } else {
                b = mid;
            }
        }
        Ok(a)
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len).map(move |i| self.get(i).expect("index in range"))
    }

    /// Logical payload size in bits: high part plus packed low parts.
    pub fn payload_bits(&self) -> u64 {
        self.high.payload_bits() + self.len * self.low_width as u64
    }

    pub fn directory_bits(&self) -> u64 {
        self.high.directory_bits()
    }

    pub(crate) fn high(&self) -> &Bitvector {
        &self.high
    }

    pub(crate) fn low_words(&self) -> &[u64] {
        &self.low
    }

    /// Reassembles a sequence from its serialized parts, checking shape.
    pub(crate) fn from_parts(
        len: u64,
        universe: u64,
        high: Bitvector,
        low: Vec<u64>,
    ) -> Result<Self> {
        if len == 0 {
            if high.len() != 0 || !low.is_empty() {
                return Err(Error::Integrity(
                    "empty monotone sequence with non-empty parts".into(),
                ));
            }
            return Ok(MonotoneSequence {
                len,
                universe,
                low_width: 0,
                high,
                low,
            });
        }
        let low_width = Self::width_for(len, universe);
        let buckets = (universe >> low_width) + 1;
        if high.len() != len + buckets || high.count_ones() != len {
            return Err(Error::Integrity(format!(
                "monotone high part has {} bits / {} ones, expected {} / {len}",
                high.len(),
                high.count_ones(),
                len + buckets
            )));
        }
        if low.len() as u64 != (len * low_width as u64).div_ceil(64) {
            return Err(Error::Integrity("monotone low part word count".into()));
        }
        Ok(MonotoneSequence {
            len,
            universe,
            low_width,
            high,
            low,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Linear-scan reference for rank.
    fn naive_rank(values: &[u64], v: u64) -> u64 {
        values.iter().filter(|&&x| x < v).count() as u64
    }

    #[test]
    fn fixed_examples() {
        let m = MonotoneSequence::build(&[1, 4, 9], 16).unwrap();
        assert_eq!(m.get(2).unwrap(), 9);
        assert_eq!(m.get(1).unwrap(), 4);
        assert_eq!(m.rank(5).unwrap(), 2);
        assert_eq!(m.rank(0).unwrap(), 0);
        assert_eq!(m.rank(16).unwrap(), 3);
        assert!(m.rank(17).is_err());
        assert!(m.get(3).is_err());

        let m = MonotoneSequence::build(&[2, 2, 2], 3).unwrap();
        assert_eq!(m.rank(3).unwrap(), 3);
        assert_eq!(m.rank(2).unwrap(), 0);
        assert_eq!(m.get(0).unwrap(), 2);
        assert_eq!(m.get(2).unwrap(), 2);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            MonotoneSequence::build(&[3, 2], 10),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            MonotoneSequence::build(&[10], 10),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            MonotoneSequence::build(&[0], 0),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn empty_sequence() {
        let m = MonotoneSequence::build(&[], 100).unwrap();
        assert_eq!(m.len(), 0);
        assert_eq!(m.rank(50).unwrap(), 0);
        assert_eq!(m.payload_bits(), 0);
        assert!(m.get(0).is_err());
    }

    proptest! {
        #[test]
        fn matches_linear_scan(
            mut values in proptest::collection::vec(0u64..5000, 0..600),
            extra in 1u64..5000,
        ) {
            values.sort_unstable();
            let universe = values.last().copied().unwrap_or(0) + extra;
            let m = MonotoneSequence::build(&values, universe).unwrap();
            for (i, &v) in values.iter().enumerate() {
                prop_assert_eq!(m.get(i as u64).unwrap(), v);
            }
            // Probe ranks at and around every stored value plus the ends.
            let mut probes = vec![0, universe];
            for &v in &values {
                probes.push(v);
                probes.push(v + 1);
                if v > 0 { probes.push(v - 1); }
            }
            for p in probes {
                if p <= universe {
                    prop_assert_eq!(m.rank(p).unwrap(), naive_rank(&values, p));
                }
            }
            prop_assert_eq!(m.iter().collect::<Vec<_>>(), values);
        }

        #[test]
        fn dense_and_sparse_regimes(n in 1u64..300, mult in 1u64..1000) {
            // Values k*mult exercise low widths from 0 upward.
            let values: Vec<u64> = (0..n).map(|k| k * mult).collect();
            let universe = (n - 1) * mult + 1;
            let m = MonotoneSequence::build(&values, universe).unwrap();
            for (i, &v) in values.iter().enumerate() {
                prop_assert_eq!(m.get(i as u64).unwrap(), v);
                prop_assert_eq!(m.rank(v).unwrap(), i as u64);
            }
        }
    }
}
