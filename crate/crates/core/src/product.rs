//! Product construction: combines two succinct automata over one alphabet
//! into a single succinct automaton for the union or intersection of their
//! languages, without ever expanding either input to a transition table.
//!
//! Two depth-first passes over the reachable pair space drive the build.
//! The first pass discovers product states in lexicographic order and emits
//! the spanning-tree parentheses and tree-edge flags; the second replays the
//! same traversal and fills the packed target array through rank queries on
//! the now-complete flags.  Working state is one map entry per product state
//! plus a stack bounded by the tree depth.

use std::collections::HashMap;

use crate::bits::Bitvector;
use crate::bptree::BpTree;
use crate::packedvec::PackedVector;
use crate::sdfa::{SuccinctDfa, TreeFlags};
use crate::{Error, Letter, Result, State};

/// Choice of final-state rule for the product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductOp {
    Union,
    Intersection,
}

impl ProductOp {
    /// A product state is final when this combination of the component
    /// verdicts holds.
    pub fn combine(self, left: bool, right: bool) -> bool {
        match self {
            ProductOp::Union => left || right,
            ProductOp::Intersection => left && right,
        }
    }
}

/// Component transition inside the product builder.  Same resolution as
/// `SuccinctDfa::delta`: constant working space, O(log σ) time.
pub fn product_delta_lookup(s: &SuccinctDfa, i: State, c: Letter) -> Result<State> {
    s.delta(i, c)
}

/// Map payload for one discovered product state.
struct PairEntry {
    preorder: u32,
    /// Preorder of the state whose tree edge discovered this one; 0 for
    /// the root.
    parent: u32,
}

/// Depth-first traversal frame: a product state and the next letter to try.
struct Frame {
    q1: State,
    q2: State,
    preorder: u32,
    next_c: Letter,
}

/// Builds the succinct product of two succinct automata directly.  The
/// output has one state per reachable pair, labeled in depth-first preorder,
/// and satisfies every structural invariant `SuccinctDfa` checks on load.
pub fn build_product(s1: &SuccinctDfa, s2: &SuccinctDfa, op: ProductOp) -> Result<SuccinctDfa> {
    let sigma = s1.alphabet_size();
    if s2.alphabet_size() != sigma {
        return Err(Error::AlphabetMismatch {
            left: sigma,
            right: s2.alphabet_size(),
        });
    }
    let n2 = s2.state_count() as u64;
    let key = |q1: State, q2: State| q1 as u64 * n2 + q2 as u64;
    let root = (s1.initial_label(), s2.initial_label());

    // Pass 1: discover product states in lexicographic depth-first order.
    // Discovery appends an open parenthesis and σ zero flags; finishing a
    // state appends the close parenthesis; tree edges set their flag.
    let mut map: HashMap<u64, PairEntry> = HashMap::new();
    let mut parens: Vec<bool> = Vec::new();
    let mut tflags: Vec<bool> = Vec::new();
    let mut finals: Vec<bool> = Vec::new();
    map.insert(
        key(root.0, root.1),
        PairEntry {
            preorder: 1,
            parent: 0,
        },
    );
    parens.push(true);
    tflags.extend(std::iter::repeat_n(false, sigma as usize));
    finals.push(op.combine(s1.is_final(root.0)?, s2.is_final(root.1)?));
    let mut count: u32 = 1;
    let mut stack = vec![Frame {
        q1: root.0,
        q2: root.1,
        preorder: 1,
        next_c: 1,
    }];
    while let Some(frame) = stack.last_mut() {
        if frame.next_c > sigma {
            parens.push(false);
            stack.pop();
            continue;
        }
        let c = frame.next_c;
        frame.next_c += 1;
        let (q1, q2, k) = (frame.q1, frame.q2, frame.preorder);
        let j1 = product_delta_lookup(s1, q1, c)?;
        let j2 = product_delta_lookup(s2, q2, c)?;
        if !map.contains_key(&key(j1, j2)) {
            count = count.checked_add(1).ok_or_else(|| {
                Error::Validation("product state count overflows the label type".into())
            })?;
            map.insert(
                key(j1, j2),
                PairEntry {
                    preorder: count,
                    parent: k,
                },
            );
            parens.push(true);
            tflags.extend(std::iter::repeat_n(false, sigma as usize));
            tflags[(sigma as u64 * (k as u64 - 1) + c as u64 - 1) as usize] = true;
            finals.push(op.combine(s1.is_final(j1)?, s2.is_final(j2)?));
            stack.push(Frame {
                q1: j1,
                q2: j2,
                preorder: count,
                next_c: 1,
            });
        }
    }
    let n = count;
    debug_assert_eq!(map.len(), n as usize);

    // The flag sequence is complete, so it can answer the rank queries that
    // place targets; build its index before the second pass.
    let tree = BpTree::from_bools(&parens)?;
    let flags = TreeFlags::from_bools(&tflags);

    // Pass 2: replay the traversal.  Each non-tree edge from the state with
    // preorder k on letter c writes the stored preorder of its endpoint at
    // the slot its zero occupies among all zeros.
    let m = (sigma as u64 - 1) * n as u64 + 1;
    let mut targets: Vec<u64> = vec![1; m as usize];
    let mut written = vec![false; m as usize];
    let mut stack = vec![Frame {
        q1: root.0,
        q2: root.1,
        preorder: 1,
        next_c: 1,
    }];
    while let Some(frame) = stack.last_mut() {
        if frame.next_c > sigma {
            stack.pop();
            continue;
        }
        let c = frame.next_c;
        frame.next_c += 1;
        let (q1, q2, k) = (frame.q1, frame.q2, frame.preorder);
        let j1 = product_delta_lookup(s1, q1, c)?;
        let j2 = product_delta_lookup(s2, q2, c)?;
        let entry = &map[&key(j1, j2)];
        let pos = sigma as u64 * (k as u64 - 1) + c as u64;
        if tflags[pos as usize - 1] {
            debug_assert_eq!(entry.parent, k);
            stack.push(Frame {
                q1: j1,
                q2: j2,
                preorder: entry.preorder,
                next_c: 1,
            });
        } else {
            let ell = pos - flags.rank1(pos);
            targets[ell as usize - 1] = entry.preorder as u64;
            written[ell as usize - 1] = true;
        }
    }
    // Every zero flag corresponds to exactly one traversal step, so every
    // slot must have been overwritten.
    if !written.into_iter().all(|w| w) {
        return Err(Error::Integrity(
            "product target slot left unwritten".into(),
        ));
    }

    SuccinctDfa::from_parts(
        n,
        sigma,
        1,
        Bitvector::from_bools(&finals),
        tree,
        flags,
        PackedVector::build(&targets, n as u64 + 1)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{lex_dfs, random_connected_dfa, ExplicitDfa};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    /// Two states over a three-letter alphabet, accepting exactly the
    /// strings whose last letter is letter 1.
    fn ends_with_first() -> ExplicitDfa {
        ExplicitDfa::new(2, 3, 1, vec![false, true], vec![2, 1, 1, 2, 1, 1]).unwrap()
    }

    /// Same shape, accepting the strings whose last letter is letter 2.
    fn ends_with_second() -> ExplicitDfa {
        ExplicitDfa::new(2, 3, 1, vec![false, true], vec![1, 2, 1, 1, 2, 1]).unwrap()
    }

    /// Every string over 1..=sigma of length at most max_len, shortest
    /// first.
    fn all_strings(sigma: u32, max_len: usize) -> Vec<Vec<Letter>> {
        let mut out: Vec<Vec<Letter>> = vec![vec![]];
        let mut start = 0;
        for _ in 0..max_len {
            let end = out.len();
            for i in start..end {
                for c in 1..=sigma {
                    let mut y = out[i].clone();
                    y.push(c);
                    out.push(y);
                }
            }
            start = end;
        }
        out
    }

    /// Reachable pair-space product built as an explicit table, for
    /// cross-checking the direct construction.
    fn explicit_product(d1: &ExplicitDfa, d2: &ExplicitDfa, op: ProductOp) -> ExplicitDfa {
        let sigma = d1.alphabet_size();
        let n2 = d2.state_count() as u64;
        let mut label: HashMap<u64, State> = HashMap::new();
        let mut pairs: Vec<(State, State)> = vec![(d1.initial(), d2.initial())];
        label.insert(d1.initial() as u64 * n2 + d2.initial() as u64, 1);
        let mut head = 0;
        while head < pairs.len() {
            let (q1, q2) = pairs[head];
            head += 1;
            for c in 1..=sigma {
                let (j1, j2) = (d1.delta(q1, c), d2.delta(q2, c));
                if !label.contains_key(&(j1 as u64 * n2 + j2 as u64)) {
                    label.insert(j1 as u64 * n2 + j2 as u64, pairs.len() as State + 1);
                    pairs.push((j1, j2));
                }
            }
        }
        let n = pairs.len() as u32;
        let mut finals = Vec::with_capacity(pairs.len());
        let mut delta = Vec::with_capacity(pairs.len() * sigma as usize);
        for &(q1, q2) in &pairs {
            finals.push(op.combine(d1.is_final(q1), d2.is_final(q2)));
            for c in 1..=sigma {
                delta.push(label[&(d1.delta(q1, c) as u64 * n2 + d2.delta(q2, c) as u64)]);
            }
        }
        ExplicitDfa::new(n, sigma, 1, finals, delta).unwrap()
    }

    fn sections(s: &SuccinctDfa) -> (Vec<bool>, Vec<bool>, Vec<State>, Vec<bool>) {
        (
            s.tree_ref().parens().iter().collect(),
            s.flags_ref().to_bools(),
            s.target_values(),
            s.finals_bits().iter().collect(),
        )
    }

    #[test]
    fn union_accepts_strings_ending_in_either_marked_letter() {
        let s1 = SuccinctDfa::build(&ends_with_first()).unwrap();
        let s2 = SuccinctDfa::build(&ends_with_second()).unwrap();
        let p = build_product(&s1, &s2, ProductOp::Union).unwrap();
        assert_eq!(p.state_count(), 3);
        assert_eq!(p.target_values().len(), 7);
        for x in all_strings(3, 6) {
            let want = matches!(x.last(), Some(1) | Some(2));
            assert_eq!(p.accept(&x).unwrap(), want, "string {x:?}");
        }
    }

    #[test]
    fn intersection_rule_differs_from_union_on_the_same_pair() {
        let s1 = SuccinctDfa::build(&ends_with_first()).unwrap();
        let s2 = SuccinctDfa::build(&ends_with_second()).unwrap();
        let p = build_product(&s1, &s2, ProductOp::Intersection).unwrap();
        // No string ends in both letters at once, so the intersection is
        // empty.
        for x in all_strings(3, 6) {
            assert!(!p.accept(&x).unwrap(), "string {x:?}");
        }
    }

    #[test]
    fn self_intersection_reproduces_the_input_sections() {
        for seed in 0..10 {
            let d = random_connected_dfa(20, 3, 0.4, seed);
            let s = SuccinctDfa::build(&d).unwrap();
            let p = build_product(&s, &s, ProductOp::Intersection).unwrap();
            // Only diagonal pairs are reachable, so the product is the
            // input state for state, section for section.
            assert_eq!(p.state_count(), s.state_count());
            assert_eq!(sections(&p), sections(&s));
        }
    }

    #[test]
    fn component_lookup_matches_relabeled_table() {
        let d = ends_with_first();
        let s = SuccinctDfa::build(&d).unwrap();
        let hit = product_delta_lookup(&s, s.initial_label(), 1).unwrap();
        assert!(s.is_final(hit).unwrap());
        let relabeled = lex_dfs(&d).relabeled_dfa(&d);
        for q in 1..=s.state_count() {
            for c in 1..=s.alphabet_size() {
                assert_eq!(product_delta_lookup(&s, q, c).unwrap(), relabeled.delta(q, c));
            }
        }
    }

    #[test]
    fn random_products_match_boolean_oracle() {
        let mut rng = StdRng::seed_from_u64(0x9e3779b97f4a7c15);
        for seed in 0..40 {
            let d1 = random_connected_dfa(30, 4, 0.3, 2 * seed);
            let d2 = random_connected_dfa(30, 4, 0.3, 2 * seed + 1);
            let s1 = SuccinctDfa::build(&d1).unwrap();
            let s2 = SuccinctDfa::build(&d2).unwrap();
            for op in [ProductOp::Union, ProductOp::Intersection] {
                let p = build_product(&s1, &s2, op).unwrap();
                assert!(p.state_count() <= s1.state_count() * s2.state_count());
                for _ in 0..50 {
                    let len = rng.random_range(0..=12);
                    let x: Vec<Letter> = (0..len).map(|_| rng.random_range(1..=4)).collect();
                    let want = op.combine(d1.accept(&x).unwrap(), d2.accept(&x).unwrap());
                    assert_eq!(p.accept(&x).unwrap(), want, "op {op:?} string {x:?}");
                }
            }
        }
    }

    #[test]
    fn exhaustive_small_binary_products_match_oracle() {
        for seed in 0..8 {
            let d1 = random_connected_dfa(5, 2, 0.5, 100 + seed);
            let d2 = random_connected_dfa(5, 2, 0.5, 200 + seed);
            let s1 = SuccinctDfa::build(&d1).unwrap();
            let s2 = SuccinctDfa::build(&d2).unwrap();
            for op in [ProductOp::Union, ProductOp::Intersection] {
                let p = build_product(&s1, &s2, op).unwrap();
                for x in all_strings(2, 8) {
                    let want = op.combine(d1.accept(&x).unwrap(), d2.accept(&x).unwrap());
                    assert_eq!(p.accept(&x).unwrap(), want);
                }
            }
        }
    }

    #[test]
    fn direct_construction_matches_explicit_encoding() {
        for seed in 0..20 {
            let d1 = random_connected_dfa(12, 3, 0.4, 300 + seed);
            let d2 = random_connected_dfa(12, 3, 0.4, 400 + seed);
            let s1 = SuccinctDfa::build(&d1).unwrap();
            let s2 = SuccinctDfa::build(&d2).unwrap();
            for op in [ProductOp::Union, ProductOp::Intersection] {
                let direct = build_product(&s1, &s2, op).unwrap();
                let via_table = SuccinctDfa::build(&explicit_product(&d1, &d2, op)).unwrap();
                assert_eq!(direct.state_count(), via_table.state_count());
                assert_eq!(sections(&direct), sections(&via_table));
            }
        }
    }

    #[test]
    fn single_letter_product_collapses_to_a_cycle() {
        let d1 = random_connected_dfa(6, 1, 0.5, 7);
        let d2 = random_connected_dfa(4, 1, 0.5, 8);
        let s1 = SuccinctDfa::build(&d1).unwrap();
        let s2 = SuccinctDfa::build(&d2).unwrap();
        let p = build_product(&s1, &s2, ProductOp::Union).unwrap();
        assert!(p.state_count() <= s1.state_count() * s2.state_count());
        for len in 0..30usize {
            let x = vec![1; len];
            let want = d1.accept(&x).unwrap() || d2.accept(&x).unwrap();
            assert_eq!(p.accept(&x).unwrap(), want);
        }
    }

    #[test]
    fn alphabet_mismatch_is_rejected() {
        let s1 = SuccinctDfa::build(&ends_with_first()).unwrap();
        let d2 = random_connected_dfa(4, 2, 0.5, 9);
        let s2 = SuccinctDfa::build(&d2).unwrap();
        let err = build_product(&s1, &s2, ProductOp::Union).unwrap_err();
        assert!(matches!(err, Error::AlphabetMismatch { left: 3, right: 2 }));
    }
}
