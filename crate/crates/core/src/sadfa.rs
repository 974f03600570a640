//! Succinct acyclic deterministic automaton.
//!
//! In a complete acyclic automaton every path eventually falls into the one
//! absorbing dead state, so the last letter's transitions δ(·,σ) form a tree
//! on all states rooted there.  That tree is stored as parentheses, states
//! take its preorder numbers shifted down by one (the dead state gets 0),
//! and only the letters 1..σ−1 need a stored table.  A transition is then a
//! table read or one parent step: constant time per input symbol, no rank
//! over a compressed flag sequence involved.

use std::collections::VecDeque;

use crate::automaton::ExplicitDfa;
use crate::bits::Bitvector;
use crate::bptree::BpTree;
use crate::packedvec::PackedVector;
use crate::{Error, Letter, Result, State};

/// Per-section bit counts; payload only, directories reported separately.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuccinctAcyclicDfaSpace {
    pub tree_bits: u64,
    pub table_bits: u64,
    pub finals_bits: u64,
    pub directory_bits: u64,
}

impl SuccinctAcyclicDfaSpace {
    pub fn payload_bits(&self) -> u64 {
        self.tree_bits + self.table_bits + self.finals_bits
    }
}

/// Succinct encoding of a complete, initially connected, acyclic automaton.
///
/// States are the labels 0..n−1 with 0 the dead state; the stored start
/// label replays the original initial state.
#[derive(Clone, Debug)]
pub struct SuccinctAcyclicDfa {
    n: u32,
    sigma: u32,
    start: State,
    /// Spanning tree of the δ(·,σ) parent map; preorder rank = label + 1.
    tree: BpTree,
    /// Transitions for letters 1..σ−1 of states 1..n−1, row-major, base n.
    table: PackedVector,
    /// Finality by label, bit label+1.
    finals: Bitvector,
}

impl SuccinctAcyclicDfa {
    /// Encodes a validated acyclic automaton.
    pub fn build(d: &ExplicitDfa) -> Result<Self> {
        Ok(Self::construct(d)?.0)
    }

    /// Builds and also returns the old-state → label map.
    pub(crate) fn construct(d: &ExplicitDfa) -> Result<(Self, Vec<State>)> {
        d.validate()?;
        let Some(dead) = d.classify_acyclic() else {
            return Err(Error::NotAcyclic);
        };
        let n = d.state_count();
        let sigma = d.alphabet_size();

        // Children under the δ(·,σ) parent map, ascending by original state.
        let mut children: Vec<Vec<State>> = vec![Vec::new(); n as usize + 1];
        for q in 1..=n {
            if q != dead {
                children[d.delta(q, sigma) as usize].push(q);
            }
        }

        // Preorder walk from the dead state; label = preorder rank − 1.
        let mut label = vec![u32::MAX; n as usize + 1];
        let mut parens = Vec::with_capacity(2 * n as usize);
        let mut next = 0u32;
        // Frames: (state, next child index).
        let mut stack: Vec<(State, usize)> = vec![(dead, 0)];
        label[dead as usize] = 0;
        next += 1;
        parens.push(true);
        while let Some(&mut (q, ref mut i)) = stack.last_mut() {
            if *i == children[q as usize].len() {
                parens.push(false);
                stack.pop();
                continue;
            }
            let child = children[q as usize][*i];
            *i += 1;
            label[child as usize] = next;
            next += 1;
            parens.push(true);
            stack.push((child, 0));
        }
        if next != n {
            // The parent map failed to reach every state, which a genuinely
            // acyclic automaton cannot do.
            return Err(Error::Validation(format!(
                "last-letter transitions span {next} of {n} states"
            )));
        }

        let mut old_of = vec![0 as State; n as usize];
        for q in 1..=n {
            old_of[label[q as usize] as usize] = q;
        }
        let mut table = Vec::with_capacity((n as usize - 1) * (sigma as usize - 1));
        for lab in 1..n {
            let q = old_of[lab as usize];
            for c in 1..sigma {
                table.push(label[d.delta(q, c) as usize] as u64);
            }
        }
        let mut finals = vec![false; n as usize];
        for q in 1..=n {
            finals[label[q as usize] as usize] = d.is_final(q);
        }

        let s = SuccinctAcyclicDfa {
            n,
            sigma,
            start: label[d.initial() as usize],
            tree: BpTree::from_bools(&parens)?,
            table: PackedVector::build(&table, n as u64)?,
            finals: Bitvector::from_bools(&finals),
        };
        let map: Vec<State> = label[..].to_vec();
        Ok((s, map))
    }

    pub fn state_count(&self) -> u32 {
        self.n
    }

    pub fn alphabet_size(&self) -> u32 {
        self.sigma
    }

    /// Label the original initial state received.
    pub fn start_label(&self) -> State {
        self.start
    }

    /// The absorbing dead state's label.
    pub fn dead_label(&self) -> State {
        0
    }

    pub fn is_final(&self, q: State) -> Result<bool> {
        self.finals.get(q as u64 + 1)
    }

    /// The transition target for label `q`: a table read for letters below
    /// σ, the tree parent for σ itself, 0 forever once dead.
    pub fn delta(&self, q: State, c: Letter) -> Result<State> {
        if q as u64 >= self.n as u64 {
            return Err(Error::OutOfRange {
                what: "state label",
                index: q as u64,
                limit: self.n as u64 - 1,
            });
        }
        if c == 0 || c > self.sigma {
            return Err(Error::LetterOutOfRange {
                letter: c,
                sigma: self.sigma,
            });
        }
        if q == 0 {
            return Ok(0);
        }
        if c < self.sigma {
            let idx = (q as u64 - 1) * (self.sigma as u64 - 1) + (c as u64 - 1);
            Ok(self.table.get(idx)? as State)
        } else {
            let parent = self
                .tree
                .parent(q as u64 + 1)?
                .expect("non-root node has a parent");
            Ok(parent as State - 1)
        }
    }

    /// Runs the automaton over `x`.  Constant working space: one label.
    pub fn accept(&self, x: &[Letter]) -> Result<bool> {
        let mut q = self.start;
        for &c in x {
            q = self.delta(q, c)?;
        }
        self.is_final(q)
    }

    pub fn space(&self) -> SuccinctAcyclicDfaSpace {
        SuccinctAcyclicDfaSpace {
            tree_bits: self.tree.payload_bits(),
            table_bits: self.table.payload_bits(),
            finals_bits: self.finals.len(),
            directory_bits: self.tree.directory_bits() + self.finals.directory_bits(),
        }
    }

    pub(crate) fn tree_ref(&self) -> &BpTree {
        &self.tree
    }

    pub(crate) fn table_ref(&self) -> &PackedVector {
        &self.table
    }

    pub(crate) fn finals_bits(&self) -> &Bitvector {
        &self.finals
    }

    /// Rebuilds from deserialized sections; checks shape, connectivity from
    /// the start label, and acyclicity of the described automaton.
    pub(crate) fn from_parts(
        n: u32,
        sigma: u32,
        start: State,
        tree: BpTree,
        table: PackedVector,
        finals: Bitvector,
    ) -> Result<Self> {
        let fail = |msg: String| Err(Error::Integrity(msg));
        if n == 0 || sigma == 0 {
            return fail("empty automaton".into());
        }
        if tree.node_count() != n as u64 {
            return fail(format!("tree has {} nodes for {n} states", tree.node_count()));
        }
        if finals.len() != n as u64 {
            return fail(format!("final section has {} bits for {n} states", finals.len()));
        }
        let want = (n as u64 - 1) * (sigma as u64 - 1);
        if table.len() != want || (want > 0 && table.base() != n as u64) {
            return fail(format!(
                "table section has {} entries base {}, want {want} entries base {n}",
                table.len(),
                table.base()
            ));
        }
        if start as u64 >= n as u64 {
            return fail(format!("start label {start} out of range"));
        }
        let s = SuccinctAcyclicDfa {
            n,
            sigma,
            start,
            tree,
            table,
            finals,
        };

        // Reachability from the start label.
        let mut seen = vec![false; n as usize];
        seen[s.start as usize] = true;
        let mut queue = VecDeque::from([s.start]);
        let mut visited = 1u32;
        while let Some(q) = queue.pop_front() {
            for c in 1..=sigma {
                let t = s.delta(q, c).map_err(|e| Error::Integrity(e.to_string()))?;
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    visited += 1;
                    queue.push_back(t);
                }
            }
        }
        if visited != n {
            return fail(format!("only {visited} of {n} labels reachable from the start"));
        }

        // No cycles among the transient labels: depth-first coloring.
        let mut color = vec![0u8; n as usize]; // 0 fresh, 1 on path, 2 done
        color[0] = 2;
        for root in 1..n {
            if color[root as usize] != 0 {
                continue;
            }
            // Frames: (label, next letter).
            let mut stack: Vec<(State, Letter)> = vec![(root, 1)];
            color[root as usize] = 1;
            while let Some(&mut (q, ref mut next_c)) = stack.last_mut() {
                if *next_c > sigma {
                    color[q as usize] = 2;
                    stack.pop();
                    continue;
                }
                let c = *next_c;
                *next_c += 1;
                let t = s.delta(q, c).map_err(|e| Error::Integrity(e.to_string()))?;
                match color[t as usize] {
                    0 => {
                        color[t as usize] = 1;
                        stack.push((t, 1));
                    }
                    1 => {
                        return fail(format!("cycle through transient label {t}"));
                    }
                    _ => {}
                }
            }
        }
        Ok(s)
    }
}
