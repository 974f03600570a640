//! Bijective codec between a connected deterministic automaton and a pair of
//! integer arrays read off its depth-first traversal.
//!
//! The depth-first walk of [`lex_dfs`] crosses exactly m = (σ−1)n+1 edges
//! that point at already-discovered states.  Listing, for each such edge in
//! walk order, the number of states discovered so far (`Max`) and the label
//! of the target (`Boxed`) captures the whole transition structure: the walk
//! can be replayed from the arrays alone, so [`decode_dyck`] inverts
//! [`encode_dyck`] exactly.
//!
//! `Max` is non-decreasing and ends at n; every `Boxed` entry is a label no
//! larger than the `Max` beside it; and the i-th entry satisfies
//! Max[i] ≥ ⌈i/(σ−1)⌉ because σ−1 backward edges per discovered state is the
//! most the walk can see before discovering another.  [`DyckBoxedDiagram`]
//! enforces all three, and every array pair satisfying them decodes to a
//! valid automaton.

use crate::automaton::{lex_dfs, ExplicitDfa};
use crate::bits::{Bitvector, MonotoneSequence, SparseBitvector};
use crate::packedvec::PackedVector;
use crate::{Error, Result, State};

/// The two arrays plus the data the traversal does not determine: the
/// final-state set and the alphabet size.  States carry preorder labels, so
/// the initial state is always 1.
#[derive(Clone, Debug)]
pub struct DyckBoxedDiagram {
    n: u32,
    sigma: u32,
    /// Discovered-state counts, non-decreasing, universe n+1.
    max: MonotoneSequence,
    /// Edge targets, base n+1 (value 0 is reserved for absent targets in the
    /// compressed variant and never appears here).
    boxed: PackedVector,
    /// Finality by preorder label.
    finals: Bitvector,
}

impl DyckBoxedDiagram {
    /// Validates the array invariants and packs the arrays.
    pub fn from_arrays(n: u32, sigma: u32, max: &[u32], boxed: &[u32], finals: &[bool]) -> Result<Self> {
        if sigma < 2 {
            return Err(Error::UnsupportedAlphabet { sigma });
        }
        if n == 0 {
            return Err(Error::Validation("diagram needs at least one state".into()));
        }
        let m = (sigma as u64 - 1) * n as u64 + 1;
        if max.len() as u64 != m || boxed.len() as u64 != m {
            return Err(Error::Validation(format!(
                "array lengths {} and {} do not match width {m}",
                max.len(),
                boxed.len()
            )));
        }
        if finals.len() != n as usize {
            return Err(Error::Validation(format!(
                "final-state vector has {} entries for {n} states",
                finals.len()
            )));
        }
        if max[m as usize - 1] != n {
            return Err(Error::Validation(format!(
                "last count {} must equal the state count {n}",
                max[m as usize - 1]
            )));
        }
        let mut prev = 1u32;
        for (idx, (&x, &y)) in max.iter().zip(boxed).enumerate() {
            let i = idx as u64 + 1;
            if x < prev {
                return Err(Error::Validation(format!(
                    "counts must be non-decreasing, entry {i} drops to {x}"
                )));
            }
            prev = x;
            if y == 0 || y > x {
                return Err(Error::Validation(format!(
                    "target {y} at entry {i} outside 1..={x}"
                )));
            }
            // At most σ−1 back edges fit per discovered state while the walk
            // is still running, so entry i needs at least ⌈i/(σ−1)⌉ states.
            if i < m && x as u64 * (sigma as u64 - 1) < i {
                return Err(Error::Validation(format!(
                    "count {x} at entry {i} below the staircase floor"
                )));
            }
        }
        let max_vals: Vec<u64> = max.iter().map(|&x| x as u64).collect();
        let boxed_vals: Vec<u64> = boxed.iter().map(|&y| y as u64).collect();
        Ok(DyckBoxedDiagram {
            n,
            sigma,
            max: MonotoneSequence::build(&max_vals, n as u64 + 1)?,
            boxed: PackedVector::build(&boxed_vals, n as u64 + 1)?,
            finals: Bitvector::from_bools(finals),
        })
    }

    pub fn state_count(&self) -> u32 {
        self.n
    }

    pub fn alphabet_size(&self) -> u32 {
        self.sigma
    }

    /// Number of entries, (σ−1)n+1.
    pub fn width(&self) -> u64 {
        self.max.len()
    }

    pub fn initial_label(&self) -> State {
        1
    }

    /// Discovered-state count at 0-based entry `i`.
    pub fn max_at(&self, i: u64) -> Result<u32> {
        Ok(self.max.get(i)? as u32)
    }

    /// Edge target at 0-based entry `i`.
    pub fn boxed_at(&self, i: u64) -> Result<u32> {
        Ok(self.boxed.get(i)? as u32)
    }

    pub fn max_array(&self) -> Vec<u32> {
        self.max.iter().map(|x| x as u32).collect()
    }

    pub fn boxed_array(&self) -> Vec<u32> {
        self.boxed.iter().map(|y| y as u32).collect()
    }

    pub fn is_final(&self, q: State) -> bool {
        self.finals.get(q as u64).unwrap_or(false)
    }

    /// Bits in the packed arrays and the final-state vector.
    pub fn payload_bits(&self) -> u64 {
        self.max.payload_bits() + self.boxed.payload_bits() + self.finals.len()
    }

    pub(crate) fn max_seq(&self) -> &MonotoneSequence {
        &self.max
    }

    pub(crate) fn boxed_vec(&self) -> &PackedVector {
        &self.boxed
    }

    pub(crate) fn finals_bits(&self) -> &Bitvector {
        &self.finals
    }

    /// Rebuilds from deserialized sections, revalidating every invariant.
    pub(crate) fn from_parts(
        n: u32,
        sigma: u32,
        max: MonotoneSequence,
        boxed: PackedVector,
        finals: Bitvector,
    ) -> Result<Self> {
        let max_arr: Vec<u32> = max.iter().map(|x| x as u32).collect();
        let boxed_arr: Vec<u32> = boxed.iter().map(|y| y as u32).collect();
        let finals_arr: Vec<bool> = finals.iter().collect();
        let rebuilt = DyckBoxedDiagram::from_arrays(n, sigma, &max_arr, &boxed_arr, &finals_arr)
            .map_err(|e| Error::Integrity(format!("diagram sections: {e}")))?;
        if max.universe() != rebuilt.max.universe() || boxed.base() != rebuilt.boxed.base() {
            return Err(Error::Integrity("diagram sections use a foreign layout".into()));
        }
        Ok(rebuilt)
    }
}

/// Reads the arrays off the depth-first walk.  Linear in the table size.
///
/// Single-letter automata have no backward edges to record and are rejected;
/// the chain shape they force is handled by the deterministic representation
/// directly.
pub fn encode_dyck(d: &ExplicitDfa) -> Result<DyckBoxedDiagram> {
    if d.alphabet_size() < 2 {
        return Err(Error::UnsupportedAlphabet {
            sigma: d.alphabet_size(),
        });
    }
    d.validate()?;
    let dfs = lex_dfs(d);
    let n = d.state_count();
    let max: Vec<u32> = dfs.nontree_in_dfs_order.iter().map(|&(_, cnt)| cnt).collect();
    let boxed: Vec<u32> = dfs.nontree_in_dfs_order.iter().map(|&(t, _)| t).collect();
    let mut finals = vec![false; n as usize];
    for old in 1..=n {
        finals[dfs.relabel[old as usize] as usize - 1] = d.is_final(old);
    }
    DyckBoxedDiagram::from_arrays(n, d.alphabet_size(), &max, &boxed, &finals)
}

/// Replays the walk the arrays describe and rebuilds the transition table.
///
/// Keeps a discovered-state count and a cursor into the arrays; at each
/// (state, letter) step the edge is a recorded backward edge exactly when
/// the next `Max` entry equals the current count.  Inverse of
/// [`encode_dyck`] up to the preorder relabeling.
pub fn decode_dyck(diag: &DyckBoxedDiagram) -> Result<ExplicitDfa> {
    let n = diag.state_count();
    let sigma = diag.alphabet_size();
    let m = diag.width();
    let mut delta = vec![0 as State; n as usize * sigma as usize];
    let mut count = 1u32;
    let mut j = 0u64;
    // Frames: (state, next letter).
    let mut stack: Vec<(State, u32)> = vec![(1, 1)];

    while let Some(&mut (q, ref mut next_c)) = stack.last_mut() {
        if *next_c > sigma {
            stack.pop();
            continue;
        }
        let c = *next_c;
        *next_c += 1;
        let slot = (q as usize - 1) * sigma as usize + (c as usize - 1);
        if j < m && diag.max_at(j)? == count {
            delta[slot] = diag.boxed_at(j)?;
            j += 1;
        } else {
            if count == n {
                return Err(Error::Decode(
                    "walk discovers more states than the header declares".into(),
                ));
            }
            count += 1;
            delta[slot] = count;
            stack.push((count, 1));
        }
    }
    if count != n {
        return Err(Error::Decode(format!(
            "walk discovered {count} of {n} states"
        )));
    }
    if j != m {
        return Err(Error::Decode(format!(
            "walk consumed {j} of {m} entries"
        )));
    }
    let finals: Vec<bool> = (1..=n).map(|q| diag.is_final(q)).collect();
    ExplicitDfa::new(n, sigma, 1, finals, delta)
}

/// Target array with absent entries squeezed out: a sparse bitvector marks
/// which entries are present, and only those are stored.
///
/// Entry `i` reads as 0 when the mask bit is clear, otherwise as the stored
/// value at the mask's one-count up to `i`.  With k present entries out of
/// m, the stored array costs k⌈log₂(n+1)⌉ bits instead of m⌈log₂(n+1)⌉.
#[derive(Clone, Debug)]
pub struct FailureCompressedBoxed {
    /// Presence mask over the m entries.
    present: SparseBitvector,
    /// The present targets, in entry order, base n+1.
    stored: PackedVector,
}

impl FailureCompressedBoxed {
    /// Compresses a target array where 0 marks an absent entry; present
    /// entries must be labels in 1..=n.
    pub fn compress(targets: &[State], n: u32) -> Result<Self> {
        let mask: Vec<bool> = targets.iter().map(|&t| t != 0).collect();
        let mut kept = Vec::new();
        for &t in targets {
            if t > n {
                return Err(Error::Validation(format!("target {t} out of range 1..={n}")));
            }
            if t != 0 {
                kept.push(t as u64);
            }
        }
        Ok(FailureCompressedBoxed {
            present: SparseBitvector::from_bools(&mask),
            stored: PackedVector::build(&kept, n as u64 + 1)?,
        })
    }

    /// Total number of entries, absent ones included.
    pub fn len(&self) -> u64 {
        self.present.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of present entries.
    pub fn stored_count(&self) -> u64 {
        self.present.count_ones()
    }

    /// Entry `i`: 0 when absent, else the stored target.
    pub fn get(&self, i: u64) -> Result<State> {
        match self.present.partial_rank1(i + 1)? {
            None => Ok(0),
            Some(k) => Ok(self.stored.get(k - 1)? as State),
        }
    }

    /// The full array with 0 at absent entries.
    pub fn decompress(&self) -> Vec<State> {
        let mut out = vec![0 as State; self.len() as usize];
        let mut k = 0usize;
        for (i, bit) in self.present.decompress().into_iter().enumerate() {
            if bit {
                out[i] = self.stored.get(k as u64).unwrap() as State;
                k += 1;
            }
        }
        out
    }

    /// Bits in the mask and the stored targets.
    pub fn payload_bits(&self) -> u64 {
        self.present.payload_bits() + self.stored.payload_bits()
    }

    /// Bits in the stored targets alone.
    pub fn stored_bits(&self) -> u64 {
        self.stored.payload_bits()
    }

    pub(crate) fn present_mask(&self) -> &SparseBitvector {
        &self.present
    }

    pub(crate) fn stored_vec(&self) -> &PackedVector {
        &self.stored
    }

    pub(crate) fn from_parts(present: SparseBitvector, stored: PackedVector) -> Result<Self> {
        if present.count_ones() != stored.len() {
            return Err(Error::Integrity(format!(
                "presence mask has {} ones for {} stored targets",
                present.count_ones(),
                stored.len()
            )));
        }
        if stored.iter().any(|t| t == 0 || t >= stored.base()) {
            return Err(Error::Integrity("stored target out of range".into()));
        }
        Ok(FailureCompressedBoxed { present, stored })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::random_connected_dfa;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    const FIG_MAX: [u32; 15] = [3, 4, 4, 4, 4, 5, 6, 6, 6, 6, 6, 7, 7, 7, 7];
    const FIG_BOXED: [u32; 15] = [1, 2, 3, 1, 4, 3, 4, 2, 3, 1, 4, 4, 5, 3, 6];

    fn fig_diagram() -> DyckBoxedDiagram {
        let finals = [false, false, true, false, true, false, false];
        DyckBoxedDiagram::from_arrays(7, 3, &FIG_MAX, &FIG_BOXED, &finals).unwrap()
    }

    #[test]
    fn worked_example_decodes_and_reencodes_identically() {
        let diag = fig_diagram();
        assert_eq!(diag.width(), 15);
        let d = decode_dyck(&diag).unwrap();
        assert_eq!(d.state_count(), 7);
        assert_eq!(d.alphabet_size(), 3);
        d.validate().unwrap();
        assert!(d.is_final(3) && d.is_final(5) && !d.is_final(1));
        let re = encode_dyck(&d).unwrap();
        assert_eq!(re.max_array(), FIG_MAX);
        assert_eq!(re.boxed_array(), FIG_BOXED);
        assert!(re.is_final(3) && re.is_final(5) && !re.is_final(4));
    }

    #[test]
    fn two_state_example_encodes() {
        let d = crate::automaton::tests::even_zeros_dfa();
        let diag = encode_dyck(&d).unwrap();
        assert_eq!(diag.max_array(), [2, 2, 2]);
        assert_eq!(diag.boxed_array(), [1, 2, 1]);
        let back = decode_dyck(&diag).unwrap();
        assert_eq!(back, lex_dfs(&d).relabeled_dfa(&d));
    }

    #[test]
    fn single_letter_alphabet_is_rejected() {
        let d = ExplicitDfa::new(2, 1, 1, vec![true, false], vec![2, 1]).unwrap();
        match encode_dyck(&d) {
            Err(Error::UnsupportedAlphabet { sigma: 1 }) => {}
            other => panic!("expected alphabet rejection, got {other:?}"),
        }
    }

    #[test]
    fn malformed_diagrams_are_rejected() {
        let finals = [false; 2];
        // Wrong width.
        assert!(DyckBoxedDiagram::from_arrays(2, 2, &[2, 2], &[1, 1], &finals).is_err());
        // Last count below n.
        assert!(DyckBoxedDiagram::from_arrays(2, 2, &[1, 1, 1], &[1, 1, 1], &finals).is_err());
        // Decreasing counts.
        assert!(DyckBoxedDiagram::from_arrays(2, 2, &[2, 1, 2], &[1, 1, 1], &finals).is_err());
        // Target above its count.
        assert!(DyckBoxedDiagram::from_arrays(2, 2, &[1, 2, 2], &[2, 1, 1], &finals).is_err());
        // Target zero.
        assert!(DyckBoxedDiagram::from_arrays(2, 2, &[2, 2, 2], &[0, 1, 1], &finals).is_err());
        // Staircase floor: entry 2 of a σ=2 diagram needs a count of 2.
        assert!(
            DyckBoxedDiagram::from_arrays(3, 2, &[1, 1, 3, 3], &[1, 1, 1, 1], &[false; 3]).is_err()
        );
        // The valid variant of the same shape passes.
        DyckBoxedDiagram::from_arrays(2, 2, &[1, 2, 2], &[1, 1, 1], &finals).unwrap();
    }

    #[test]
    fn round_trip_on_random_automata() {
        let mut rng = StdRng::seed_from_u64(0xD1A6);
        for trial in 0..120 {
            let n = rng.random_range(1..=60);
            let sigma = [2u32, 3, 4, 8][trial % 4];
            let d = random_connected_dfa(n, sigma, 0.3, 0x5EED + trial as u64);
            let diag = encode_dyck(&d).unwrap();

            let m = diag.width();
            assert_eq!(m, (sigma as u64 - 1) * d.state_count() as u64 + 1);
            let max = diag.max_array();
            for (idx, &x) in max.iter().enumerate() {
                let i = idx as u64 + 1;
                if i < m {
                    assert!(x as u64 * (sigma as u64 - 1) >= i, "staircase floor violated");
                }
            }

            let relabeled = lex_dfs(&d).relabeled_dfa(&d);
            let back = decode_dyck(&diag).unwrap();
            assert_eq!(back, relabeled, "decode must invert encode");
            assert_eq!(encode_dyck(&back).unwrap().max_array(), max);
            assert_eq!(encode_dyck(&back).unwrap().boxed_array(), diag.boxed_array());

            for _ in 0..40 {
                let len = rng.random_range(0..=30);
                let x: Vec<u32> = (0..len).map(|_| rng.random_range(1..=sigma)).collect();
                assert_eq!(back.accept(&x).unwrap(), d.accept(&x).unwrap());
            }
        }
    }

    #[test]
    fn compressed_targets_reconstruct() {
        let mut rng = StdRng::seed_from_u64(77);
        for _ in 0..60 {
            let n = rng.random_range(1..=50u32);
            let m = rng.random_range(1..=200usize);
            let targets: Vec<State> = (0..m)
                .map(|_| {
                    if rng.random_bool(0.3) {
                        0
                    } else {
                        rng.random_range(1..=n)
                    }
                })
                .collect();
            let packed = FailureCompressedBoxed::compress(&targets, n).unwrap();
            assert_eq!(packed.len(), m as u64);
            assert_eq!(
                packed.stored_count(),
                targets.iter().filter(|&&t| t != 0).count() as u64
            );
            assert_eq!(packed.decompress(), targets);
            for (i, &t) in targets.iter().enumerate() {
                assert_eq!(packed.get(i as u64).unwrap(), t);
            }
            assert!(packed.get(m as u64).is_err());
        }
    }

    #[test]
    fn compressed_targets_degenerate_cases() {
        let all_absent = FailureCompressedBoxed::compress(&[0, 0, 0], 5).unwrap();
        assert_eq!(all_absent.stored_count(), 0);
        assert_eq!(all_absent.decompress(), [0, 0, 0]);

        let none_absent = FailureCompressedBoxed::compress(&[2, 1, 5], 5).unwrap();
        assert_eq!(none_absent.stored_count(), 3);
        assert_eq!(none_absent.decompress(), [2, 1, 5]);

        assert!(FailureCompressedBoxed::compress(&[6], 5).is_err());
    }
}
