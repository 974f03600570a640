//! Compressed bitvectors for sparse one-sets, with partial rank.

use crate::bits::MonotoneSequence;
use crate::{Error, Result};

/// A bitvector stored as the monotone sequence of its one-positions.
///
/// Occupies roughly `K*(2 + log2(len/K))` bits for `K` ones instead of `len`
/// bits.  The price is that full rank is not constant-time; instead
/// [`partial_rank1`](SparseBitvector::partial_rank1) reports the rank only at
/// positions that hold a one, which is exactly what the failure-transition
/// reconstruction rule needs.
#[derive(Clone, Debug)]
pub struct SparseBitvector {
    len: u64,
    positions: MonotoneSequence,
}

impl SparseBitvector {
    pub fn from_bools(bits: &[bool]) -> Self {
        let positions: Vec<u64> = bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i as u64))
            .collect();
        SparseBitvector {
            len: bits.len() as u64,
            positions: MonotoneSequence::build(&positions, bits.len() as u64)
                .expect("positions are strictly increasing and below length"),
        }
    }

    /// Builds from 0-based one-positions, which must be strictly increasing
    /// and below `len`.
    pub fn from_positions(len: u64, positions: &[u64]) -> Result<Self> {
        for w in positions.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::Validation(format!(
                    "one-positions not strictly increasing: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(SparseBitvector {
            len,
            positions: MonotoneSequence::build(positions, len)?,
        })
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn count_ones(&self) -> u64 {
        self.positions.len()
    }

    /// Bit at 1-based position `i`.
    pub fn get(&self, i: u64) -> Result<bool> {
        Ok(self.probe(i)?.is_some())
    }

    /// `Some(rank1(i))` if the bit at 1-based position `i` is one, `None` if
    /// it is zero.
    pub fn partial_rank1(&self, i: u64) -> Result<Option<u64>> {
        self.probe(i)
    }

    fn probe(&self, i: u64) -> Result<Option<u64>> {
        if i == 0 || i > self.len {
            return Err(Error::OutOfRange {
                what: "bit position",
                index: i,
                limit: self.len,
            });
        }
        // Ones at 1-based positions <= i are exactly stored values < i.
        let k = self.positions.rank(i)?;
        if k > 0 && self.positions.get(k - 1)? == i - 1 {
            Ok(Some(k))
        } else {
            Ok(None)
        }
    }

    /// Expands back to one bit per position.
    pub fn decompress(&self) -> Vec<bool> {
        let mut bits = vec![false; self.len as usize];
        for p in self.positions.iter() {
            bits[p as usize] = true;
        }
        bits
    }

    pub fn payload_bits(&self) -> u64 {
        self.positions.payload_bits()
    }

    pub fn directory_bits(&self) -> u64 {
        self.positions.directory_bits()
    }

    pub(crate) fn positions(&self) -> &MonotoneSequence {
        &self.positions
    }

    pub(crate) fn from_parts(len: u64, positions: MonotoneSequence) -> Result<Self> {
        if positions.universe() != len {
            return Err(Error::Integrity(
                "sparse bitvector universe does not match length".into(),
            ));
        }
        let mut prev = None;
        for p in positions.iter() {
            if prev.is_some_and(|q| q >= p) {
                return Err(Error::Integrity(
                    "sparse bitvector positions not strictly increasing".into(),
                ));
            }
            prev = Some(p);
        }
        Ok(SparseBitvector { len, positions })
    }
}
