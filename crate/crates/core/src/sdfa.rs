//! Succinct deterministic automaton: a parenthesis tree for the depth-first
//! spanning tree, a compressed flag sequence telling tree edges from the
//! rest, and a packed array of the remaining targets.
//!
//! States carry preorder labels, so the spanning tree's j-th child of q is
//! the target of q's j-th tree edge and needs no storage at all.  A
//! transition therefore resolves with two rank queries on the flags plus
//! either a tree child step or one packed-array read: O(log σ) time and
//! constant working space per input symbol.

use crate::automaton::{lex_dfs, lex_dfs_table, ExplicitDfa, LexDfsResult};
use crate::bits::{Bitvector, SparseBitvector};
use crate::bptree::BpTree;
use crate::dyckcodec::FailureCompressedBoxed;
use crate::packedvec::PackedVector;
use crate::{Error, Letter, Result, State};

/// Flag sequence of length σn with few ones, stored as the sorted positions
/// of the ones.  Supports the bit test and full rank in O(log σ) via the
/// position sequence.
#[derive(Clone, Debug)]
pub(crate) struct TreeFlags {
    bits: SparseBitvector,
}

impl TreeFlags {
    pub(crate) fn from_bools(flags: &[bool]) -> Self {
        TreeFlags {
            bits: SparseBitvector::from_bools(flags),
        }
    }

    pub(crate) fn len(&self) -> u64 {
        self.bits.len()
    }

    pub(crate) fn count_ones(&self) -> u64 {
        self.bits.count_ones()
    }

    /// Ones among the first `i` bits, `0 <= i <= len`.
    pub(crate) fn rank1(&self, i: u64) -> u64 {
        self.bits.positions().rank(i).expect("rank bound checked by caller")
    }

    /// Rank at 1-based position `pos` together with the bit itself.
    pub(crate) fn rank1_and_test(&self, pos: u64) -> Result<(u64, bool)> {
        if pos == 0 || pos > self.len() {
            return Err(Error::OutOfRange {
                what: "flag position",
                index: pos,
                limit: self.len(),
            });
        }
        let positions = self.bits.positions();
        let k = positions.rank(pos)?;
        let is_one = k > 0 && positions.get(k - 1)? == pos - 1;
        Ok((k, is_one))
    }

    /// 1-based position of the k-th one.
    #[cfg(test)]
    pub(crate) fn select1(&self, k: u64) -> Result<u64> {
        Ok(self.bits.positions().get(k - 1)? + 1)
    }

    #[cfg(test)]
    pub(crate) fn to_bools(&self) -> Vec<bool> {
        self.bits.decompress()
    }

    pub(crate) fn payload_bits(&self) -> u64 {
        self.bits.payload_bits()
    }

    pub(crate) fn directory_bits(&self) -> u64 {
        self.bits.directory_bits()
    }

    pub(crate) fn sparse(&self) -> &SparseBitvector {
        &self.bits
    }

    pub(crate) fn from_sparse(bits: SparseBitvector) -> Self {
        TreeFlags { bits }
    }
}

/// Per-section bit counts of a built succinct automaton.  Payload only;
/// rank/select directories are summed separately.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuccinctDfaSpace {
    pub finals_bits: u64,
    pub tree_bits: u64,
    pub flag_bits: u64,
    pub target_bits: u64,
    pub directory_bits: u64,
}

impl SuccinctDfaSpace {
    pub fn payload_bits(&self) -> u64 {
        self.finals_bits + self.tree_bits + self.flag_bits + self.target_bits
    }
}

/// Succinct complete deterministic automaton over preorder state labels.
#[derive(Clone, Debug)]
pub struct SuccinctDfa {
    n: u32,
    sigma: u32,
    initial: State,
    /// Finality by preorder label.
    finals: Bitvector,
    /// Depth-first spanning tree; preorder rank = state label.
    tree: BpTree,
    /// Entry σ(q−1)+c is set iff the edge labeled c out of q is a tree edge;
    /// exactly n−1 ones.
    flags: TreeFlags,
    /// Non-tree targets in flag order; length (σ−1)n+1, base n+1.
    targets: PackedVector,
}

impl SuccinctDfa {
    /// Encodes a validated automaton.  States are relabeled to preorder, so
    /// the initial label is always 1; acceptance is unchanged.
    pub fn build(d: &ExplicitDfa) -> Result<Self> {
        d.validate()?;
        let dfs = lex_dfs(d);
        Self::from_dfs(d.state_count(), d.alphabet_size(), &dfs, |old| d.is_final(old))
    }

    fn from_dfs(
        n: u32,
        sigma: u32,
        dfs: &LexDfsResult,
        old_is_final: impl Fn(State) -> bool,
    ) -> Result<Self> {
        let mut finals = vec![false; n as usize];
        for old in 1..=n {
            finals[dfs.relabel[old as usize] as usize - 1] = old_is_final(old);
        }
        let targets: Vec<u64> = dfs.nontree_targets().iter().map(|&t| t as u64).collect();
        Ok(SuccinctDfa {
            n,
            sigma,
            initial: 1,
            finals: Bitvector::from_bools(&finals),
            tree: BpTree::from_bools(&dfs.parens)?,
            flags: TreeFlags::from_bools(&dfs.tree_edge),
            targets: PackedVector::build(&targets, n as u64 + 1)?,
        })
    }

    pub fn state_count(&self) -> u32 {
        self.n
    }

    pub fn alphabet_size(&self) -> u32 {
        self.sigma
    }

    pub fn initial_label(&self) -> State {
        self.initial
    }

    pub fn is_final(&self, q: State) -> Result<bool> {
        self.finals.get(q as u64)
    }

    /// The transition target, resolved from the succinct sections.
    pub fn delta(&self, q: State, c: Letter) -> Result<State> {
        if q == 0 || q > self.n {
            return Err(Error::OutOfRange {
                what: "state",
                index: q as u64,
                limit: self.n as u64,
            });
        }
        if c == 0 || c > self.sigma {
            return Err(Error::LetterOutOfRange {
                letter: c,
                sigma: self.sigma,
            });
        }
        let before = self.sigma as u64 * (q as u64 - 1);
        let pos = before + c as u64;
        let (rank_at, is_tree) = self.flags.rank1_and_test(pos)?;
        if is_tree {
            // rank among q's own tree edges picks the child.
            let j = rank_at - self.flags.rank1(before);
            Ok(self.tree.child(q as u64, j)? as State)
        } else {
            // Zeros up to pos index the packed target array, 1-based.
            let j = pos - rank_at;
            Ok(self.targets.get(j - 1)? as State)
        }
    }

    /// Runs the automaton over `x`.  Constant working space: one state.
    pub fn accept(&self, x: &[Letter]) -> Result<bool> {
        let mut q = self.initial;
        for &c in x {
            q = self.delta(q, c)?;
        }
        self.is_final(q)
    }

    /// Same structure, final set negated: accepts the complement language.
    pub fn complement(&self) -> SuccinctDfa {
        let flipped: Vec<bool> = self.finals.iter().map(|b| !b).collect();
        SuccinctDfa {
            finals: Bitvector::from_bools(&flipped),
            ..self.clone()
        }
    }

    pub fn space(&self) -> SuccinctDfaSpace {
        SuccinctDfaSpace {
            finals_bits: self.finals.len(),
            tree_bits: self.tree.payload_bits(),
            flag_bits: self.flags.payload_bits(),
            target_bits: self.targets.payload_bits(),
            directory_bits: self.finals.directory_bits()
                + self.tree.directory_bits()
                + self.flags.directory_bits(),
        }
    }

    /// The non-tree target array, in flag order.
    pub fn target_values(&self) -> Vec<State> {
        self.targets.iter().map(|t| t as State).collect()
    }

    pub(crate) fn finals_bits(&self) -> &Bitvector {
        &self.finals
    }

    pub(crate) fn tree_ref(&self) -> &BpTree {
        &self.tree
    }

    pub(crate) fn flags_ref(&self) -> &TreeFlags {
        &self.flags
    }

    pub(crate) fn targets_ref(&self) -> &PackedVector {
        &self.targets
    }

    /// Rebuilds from deserialized sections, checking that they describe a
    /// connected automaton of the declared shape.
    pub(crate) fn from_parts(
        n: u32,
        sigma: u32,
        initial: State,
        finals: Bitvector,
        tree: BpTree,
        flags: TreeFlags,
        targets: PackedVector,
    ) -> Result<Self> {
        let s = SuccinctDfa {
            n,
            sigma,
            initial,
            finals,
            tree,
            flags,
            targets,
        };
        s.check_shape(false)?;
        Ok(s)
    }

    fn check_shape(&self, allow_absent_targets: bool) -> Result<()> {
        let n = self.n as u64;
        let sigma = self.sigma as u64;
        let fail = |msg: String| Err(Error::Integrity(msg));
        if n == 0 || sigma == 0 {
            return fail("empty automaton".into());
        }
        if self.initial == 0 || self.initial as u64 > n {
            return fail(format!("initial label {} out of range", self.initial));
        }
        if self.finals.len() != n {
            return fail(format!("final section has {} bits for {n} states", self.finals.len()));
        }
        if self.tree.node_count() != n {
            return fail(format!(
                "tree section has {} nodes for {n} states",
                self.tree.node_count()
            ));
        }
        if self.flags.len() != sigma * n || self.flags.count_ones() != n - 1 {
            return fail(format!(
                "flag section is {} bits with {} ones, want {} bits with {} ones",
                self.flags.len(),
                self.flags.count_ones(),
                sigma * n,
                n - 1
            ));
        }
        let m = (sigma - 1) * n + 1;
        if self.targets.len() != m || self.targets.base() != n + 1 {
            return fail(format!(
                "target section has {} entries base {}, want {m} entries base {}",
                self.targets.len(),
                self.targets.base(),
                n + 1
            ));
        }
        let floor = if allow_absent_targets { 0 } else { 1 };
        if self.targets.iter().any(|t| t < floor || t > n) {
            return fail("target outside the state range".into());
        }
        // Tree edges per state must match the node's child count.
        for q in 1..=n {
            let row = self.flags.rank1(sigma * q) - self.flags.rank1(sigma * (q - 1));
            let deg = self.tree.degree(q)?;
            if row != deg {
                return fail(format!("state {q} has {row} tree flags but {deg} children"));
            }
        }
        Ok(())
    }
}

/// Per-section bit counts of the failure-transition variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuccinctDfaFailureSpace {
    pub finals_bits: u64,
    pub tree_bits: u64,
    pub flag_bits: u64,
    /// Presence mask over the non-tree entries.
    pub mask_bits: u64,
    /// The stored (present) targets only.
    pub stored_target_bits: u64,
    pub directory_bits: u64,
}

impl SuccinctDfaFailureSpace {
    pub fn payload_bits(&self) -> u64 {
        self.finals_bits + self.tree_bits + self.flag_bits + self.mask_bits + self.stored_target_bits
    }
}

/// Variant for automata that funnel dead-end transitions into one absorbing
/// non-final sink.  The sink is dropped from the state set and its incoming
/// transitions are stored only as absences: a presence mask plus the packed
/// surviving targets replace the full target array.
#[derive(Clone, Debug)]
pub struct SuccinctDfaFailure {
    n: u32,
    sigma: u32,
    initial: State,
    finals: Bitvector,
    tree: BpTree,
    flags: TreeFlags,
    /// Non-tree targets with sink entries absent; reads as 0 there.
    targets: FailureCompressedBoxed,
}

impl SuccinctDfaFailure {
    /// Encodes all states of `d` except `sink`, which must be an absorbing
    /// non-final state; transitions into it become absent entries.  The rest
    /// of the automaton must stay connected without passing through the
    /// sink, which absorption guarantees when `d` itself is connected.
    pub fn build(d: &ExplicitDfa, sink: State) -> Result<Self> {
        let n_full = d.state_count();
        let sigma = d.alphabet_size();
        if sink == 0 || sink > n_full {
            return Err(Error::Validation(format!(
                "sink state {sink} out of range 1..={n_full}"
            )));
        }
        if d.is_final(sink) {
            return Err(Error::Validation(format!("sink state {sink} is final")));
        }
        for c in 1..=sigma {
            if d.delta(sink, c) != sink {
                return Err(Error::Validation(format!(
                    "sink state {sink} moves away on letter {c}"
                )));
            }
        }
        if d.initial() == sink {
            return Err(Error::Validation("initial state is the sink".into()));
        }

        // Drop the sink: remaining states keep their order, targets into the
        // sink become 0.
        let n = n_full - 1;
        let squeeze = |q: State| if q > sink { q - 1 } else { q };
        let mut delta = vec![0 as State; n as usize * sigma as usize];
        let mut finals_red = vec![false; n as usize];
        for q in 1..=n_full {
            if q == sink {
                continue;
            }
            finals_red[squeeze(q) as usize - 1] = d.is_final(q);
            for c in 1..=sigma {
                let t = d.delta(q, c);
                delta[(squeeze(q) as usize - 1) * sigma as usize + c as usize - 1] =
                    if t == sink { 0 } else { squeeze(t) };
            }
        }
        let dfs = lex_dfs_table(n, sigma, squeeze(d.initial()), &delta)?;

        let mut finals = vec![false; n as usize];
        for q in 1..=n {
            finals[dfs.relabel[q as usize] as usize - 1] = finals_red[q as usize - 1];
        }
        let targets = dfs.nontree_targets();
        Ok(SuccinctDfaFailure {
            n,
            sigma,
            initial: 1,
            finals: Bitvector::from_bools(&finals),
            tree: BpTree::from_bools(&dfs.parens)?,
            flags: TreeFlags::from_bools(&dfs.tree_edge),
            targets: FailureCompressedBoxed::compress(&targets, n)?,
        })
    }

    pub fn state_count(&self) -> u32 {
        self.n
    }

    pub fn alphabet_size(&self) -> u32 {
        self.sigma
    }

    pub fn initial_label(&self) -> State {
        self.initial
    }

    pub fn is_final(&self, q: State) -> Result<bool> {
        self.finals.get(q as u64)
    }

    /// The transition target; 0 means the dropped sink.
    pub fn delta(&self, q: State, c: Letter) -> Result<State> {
        if q == 0 || q > self.n {
            return Err(Error::OutOfRange {
                what: "state",
                index: q as u64,
                limit: self.n as u64,
            });
        }
        if c == 0 || c > self.sigma {
            return Err(Error::LetterOutOfRange {
                letter: c,
                sigma: self.sigma,
            });
        }
        let before = self.sigma as u64 * (q as u64 - 1);
        let pos = before + c as u64;
        let (rank_at, is_tree) = self.flags.rank1_and_test(pos)?;
        if is_tree {
            let j = rank_at - self.flags.rank1(before);
            Ok(self.tree.child(q as u64, j)? as State)
        } else {
            let j = pos - rank_at;
            self.targets.get(j - 1)
        }
    }

    /// Runs the automaton; hitting an absent target rejects immediately
    /// because the sink is absorbing and non-final.
    pub fn accept(&self, x: &[Letter]) -> Result<bool> {
        let mut q = self.initial;
        for &c in x {
            if c == 0 || c > self.sigma {
                return Err(Error::LetterOutOfRange {
                    letter: c,
                    sigma: self.sigma,
                });
            }
            q = self.delta(q, c)?;
            if q == 0 {
                return Ok(false);
            }
        }
        self.is_final(q)
    }

    /// Count of explicitly stored transitions: tree edges plus present
    /// non-tree targets.
    pub fn stored_transitions(&self) -> u64 {
        self.n as u64 - 1 + self.targets.stored_count()
    }

    pub fn space(&self) -> SuccinctDfaFailureSpace {
        SuccinctDfaFailureSpace {
            finals_bits: self.finals.len(),
            tree_bits: self.tree.payload_bits(),
            flag_bits: self.flags.payload_bits(),
            mask_bits: self.targets.present_mask().payload_bits(),
            stored_target_bits: self.targets.stored_bits(),
            directory_bits: self.finals.directory_bits()
                + self.tree.directory_bits()
                + self.flags.directory_bits()
                + self.targets.present_mask().directory_bits(),
        }
    }

    /// The reconstructed non-tree target array, 0 at absent entries.
    pub fn target_values(&self) -> Vec<State> {
        self.targets.decompress()
    }

    pub(crate) fn finals_bits(&self) -> &Bitvector {
        &self.finals
    }

    pub(crate) fn tree_ref(&self) -> &BpTree {
        &self.tree
    }

    pub(crate) fn flags_ref(&self) -> &TreeFlags {
        &self.flags
    }

    pub(crate) fn targets_ref(&self) -> &FailureCompressedBoxed {
        &self.targets
    }

    pub(crate) fn from_parts(
        n: u32,
        sigma: u32,
        initial: State,
        finals: Bitvector,
        tree: BpTree,
        flags: TreeFlags,
        targets: FailureCompressedBoxed,
    ) -> Result<Self> {
        // Piggyback on the plain shape check with absent targets allowed.
        let probe = SuccinctDfa {
            n,
            sigma,
            initial,
            finals: finals.clone(),
            tree: tree.clone(),
            flags: flags.clone(),
            targets: PackedVector::build(
                &targets.decompress().iter().map(|&t| t as u64).collect::<Vec<_>>(),
                n as u64 + 1,
            )?,
        };
        probe.check_shape(true)?;
        Ok(SuccinctDfaFailure {
            n,
            sigma,
            initial,
            finals,
            tree,
            flags,
            targets,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::tests::even_zeros_dfa;
    use crate::automaton::random_connected_dfa;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn two_state_example_sections() {
        let s = SuccinctDfa::build(&even_zeros_dfa()).unwrap();
        assert_eq!(s.state_count(), 2);
        assert_eq!(s.initial_label(), 1);
        let parens: Vec<bool> = s.tree_ref().parens().iter().collect();
        assert_eq!(parens, [true, true, false, false]);
        assert_eq!(s.flags_ref().to_bools(), [true, false, false, false]);
        assert_eq!(s.target_values(), [1, 1, 2]);
        assert!(s.is_final(1).unwrap() && !s.is_final(2).unwrap());
    }

    #[test]
    fn two_state_example_queries() {
        let s = SuccinctDfa::build(&even_zeros_dfa()).unwrap();
        assert_eq!(s.delta(1, 1).unwrap(), 2);
        assert_eq!(s.delta(1, 2).unwrap(), 1);
        assert_eq!(s.delta(2, 1).unwrap(), 1);
        assert_eq!(s.delta(2, 2).unwrap(), 2);
        assert!(s.accept(&[]).unwrap());
        assert!(!s.accept(&[1]).unwrap());
        assert!(s.accept(&[1, 1]).unwrap());
        assert!(s.accept(&[2, 2, 1, 2, 1]).unwrap());
        assert!(s.delta(3, 1).is_err());
        assert!(s.delta(1, 3).is_err());
        assert!(s.accept(&[3]).is_err());
    }

    #[test]
    fn one_state_single_letter() {
        let d = ExplicitDfa::new(1, 1, 1, vec![true], vec![1]).unwrap();
        let s = SuccinctDfa::build(&d).unwrap();
        let parens: Vec<bool> = s.tree_ref().parens().iter().collect();
        assert_eq!(parens, [true, false]);
        assert_eq!(s.flags_ref().to_bools(), [false]);
        assert_eq!(s.target_values(), [1]);
        assert!(s.accept(&[1, 1, 1]).unwrap());
    }

    #[test]
    fn delta_matches_relabeled_oracle_exhaustively() {
        let mut rng = StdRng::seed_from_u64(0x5DFA);
        for trial in 0..80u64 {
            let sigma = [1u32, 2, 4, 16][trial as usize % 4];
            let d = random_connected_dfa(rng.random_range(1..=120), sigma, 0.25, 0xFACE + trial);
            let n = d.state_count();
            let relabeled = lex_dfs(&d).relabeled_dfa(&d);
            let s = SuccinctDfa::build(&d).unwrap();
            for q in 1..=n {
                for c in 1..=sigma {
                    assert_eq!(s.delta(q, c).unwrap(), relabeled.delta(q, c));
                }
            }
            for _ in 0..30 {
                let len = rng.random_range(0..=40);
                let x: Vec<u32> = (0..len).map(|_| rng.random_range(1..=sigma)).collect();
                assert_eq!(s.accept(&x).unwrap(), d.accept(&x).unwrap());
            }
        }
    }

    #[test]
    fn tree_edge_positions_recoverable_by_select() {
        let mut rng = StdRng::seed_from_u64(0x7E57);
        for trial in 0..20u64 {
            let sigma = [2u32, 3, 8][trial as usize % 3];
            let d = random_connected_dfa(rng.random_range(2..=80), sigma, 0.5, trial);
            let n = d.state_count();
            let s = SuccinctDfa::build(&d).unwrap();
            let flags = s.flags_ref().to_bools();
            for q in 1..=n as u64 {
                let before = s.flags_ref().rank1(sigma as u64 * (q - 1));
                let row = &flags[(sigma as u64 * (q - 1)) as usize..(sigma as u64 * q) as usize];
                let mut j = 0;
                for (off, &bit) in row.iter().enumerate() {
                    if bit {
                        j += 1;
                        let pos = s.flags_ref().select1(before + j).unwrap();
                        assert_eq!(pos, sigma as u64 * (q - 1) + off as u64 + 1);
                    }
                }
            }
        }
    }

    #[test]
    fn complement_negates_and_involutes() {
        let mut rng = StdRng::seed_from_u64(0xC0);
        for trial in 0..20u64 {
            let d = random_connected_dfa(rng.random_range(1..=60), 3, 0.4, trial);
            let s = SuccinctDfa::build(&d).unwrap();
            let comp = s.complement();
            let double = comp.complement();
            for _ in 0..50 {
                let len = rng.random_range(0..=20);
                let x: Vec<u32> = (0..len).map(|_| rng.random_range(1..=3)).collect();
                let orig = s.accept(&x).unwrap();
                assert_eq!(comp.accept(&x).unwrap(), !orig);
                assert_eq!(double.accept(&x).unwrap(), orig);
            }
        }
    }

    #[test]
    fn space_stays_within_packing_bounds() {
        for &(want, sigma) in &[(1u32, 1u32), (7, 3), (50, 2), (40, 16), (120, 4)] {
            let d = random_connected_dfa(want, sigma, 0.3, 99);
            let n = d.state_count();
            let s = SuccinctDfa::build(&d).unwrap();
            let space = s.space();
            let m = (sigma as u64 - 1) * n as u64 + 1;
            let width = (n as u64 + 1).next_power_of_two().trailing_zeros() as u64;
            assert!(space.target_bits <= m * width.max(1));
            assert_eq!(space.finals_bits, n as u64);
            assert_eq!(space.tree_bits, 2 * n as u64);
        }
    }

    fn with_sink(want: u32, sigma: u32, redirect: f64, seed: u64) -> (ExplicitDfa, State) {
        let base = random_connected_dfa(want, sigma, 0.4, seed);
        let n = base.state_count();
        let dfs = lex_dfs(&base);
        let mut rng = StdRng::seed_from_u64(seed ^ 0x51DE);
        let sink = n + 1;
        let mut delta = Vec::with_capacity((n as usize + 1) * sigma as usize);
        for q in 1..=n {
            for c in 1..=sigma {
                let tree = dfs.tree_edge[(dfs.relabel[q as usize] as usize - 1) * sigma as usize
                    + c as usize
                    - 1];
                if !tree && rng.random_bool(redirect) {
                    delta.push(sink);
                } else {
                    delta.push(base.delta(q, c));
                }
            }
        }
        delta.extend(std::iter::repeat_n(sink, sigma as usize));
        let mut finals: Vec<bool> = base.finals().to_vec();
        finals.push(false);
        let d = ExplicitDfa::new(n + 1, sigma, base.initial(), finals, delta).unwrap();
        (d, sink)
    }

    #[test]
    fn sink_variant_matches_oracle() {
        let mut rng = StdRng::seed_from_u64(0xFA11);
        let mut saw_redirect = false;
        for trial in 0..40u64 {
            let sigma = [2u32, 3, 4][trial as usize % 3];
            let (d, sink) = with_sink(rng.random_range(2..=60), sigma, 0.5, trial);
            let n = d.state_count() - 1;
            if d.delta_table().iter().filter(|&&t| t == sink).count() > sigma as usize {
                saw_redirect = true;
            }
            let s = SuccinctDfaFailure::build(&d, sink).unwrap();
            assert_eq!(s.state_count(), n);
            for _ in 0..60 {
                let len = rng.random_range(0..=25);
                let x: Vec<u32> = (0..len).map(|_| rng.random_range(1..=sigma)).collect();
                assert_eq!(s.accept(&x).unwrap(), d.accept(&x).unwrap(), "trial {trial}");
            }
        }
        assert!(saw_redirect);
    }

    #[test]
    fn sink_variant_reconstructs_target_array() {
        for trial in 0..20u64 {
            let (d, sink) = with_sink(30, 3, 0.6, 0xA0 + trial);
            let s = SuccinctDfaFailure::build(&d, sink).unwrap();
            // Recompute the uncompressed array straight from the reduced
            // depth-first run.
            let n = d.state_count() - 1;
            let sigma = 3u32;
            let squeeze = |q: State| if q > sink { q - 1 } else { q };
            let mut delta = vec![0 as State; n as usize * sigma as usize];
            for q in 1..=n + 1 {
                if q == sink {
                    continue;
                }
                for c in 1..=sigma {
                    let t = d.delta(q, c);
                    delta[(squeeze(q) as usize - 1) * sigma as usize + c as usize - 1] =
                        if t == sink { 0 } else { squeeze(t) };
                }
            }
            let dfs = lex_dfs_table(n, sigma, squeeze(d.initial()), &delta).unwrap();
            assert_eq!(s.target_values(), dfs.nontree_targets());
            let absent = dfs.nontree_targets().iter().filter(|&&t| t == 0).count() as u64;
            assert_eq!(s.targets_ref().stored_count(), dfs.nontree_targets().len() as u64 - absent);
        }
    }

    #[test]
    fn unreachable_sink_degenerates_to_plain_build() {
        let base = random_connected_dfa(25, 3, 0.3, 5);
        let sink = base.state_count() + 1;
        let mut delta = base.delta_table().to_vec();
        delta.extend(std::iter::repeat_n(sink, 3));
        let mut finals = base.finals().to_vec();
        finals.push(false);
        let d = ExplicitDfa::new(sink, 3, base.initial(), finals, delta).unwrap();
        let s = SuccinctDfaFailure::build(&d, sink).unwrap();
        assert_eq!(s.targets_ref().stored_count(), s.targets_ref().len());
        let plain = SuccinctDfa::build(&base).unwrap();
        assert_eq!(s.target_values(), plain.target_values());
        let mut rng = StdRng::seed_from_u64(1);
        for _ in 0..80 {
            let len = rng.random_range(0..=20);
            let x: Vec<u32> = (0..len).map(|_| rng.random_range(1..=3)).collect();
            assert_eq!(s.accept(&x).unwrap(), plain.accept(&x).unwrap());
        }
    }

    #[test]
    fn sink_preconditions_are_checked() {
        let d = even_zeros_dfa();
        // State 2 is not absorbing.
        assert!(SuccinctDfaFailure::build(&d, 2).is_err());
        // A final absorbing state is rejected.
        let loops = ExplicitDfa::new(2, 1, 1, vec![false, true], vec![2, 2]).unwrap();
        assert!(SuccinctDfaFailure::build(&loops, 2).is_err());
        // The initial state cannot be the sink.
        let lone = ExplicitDfa::new(1, 1, 1, vec![false], vec![1]).unwrap();
        assert!(SuccinctDfaFailure::build(&lone, 1).is_err());
    }
}
