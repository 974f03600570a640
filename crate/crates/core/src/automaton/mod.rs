//! Pointer-based automata: the uncompressed representations that the
//! succinct builders consume and the test oracles run on.
//!
//! States and letters are 1-based throughout.  A deterministic automaton is
//! complete (every state has a transition on every letter) and initially
//! connected (every state reachable from the initial state); [`ExplicitDfa::validate`]
//! enforces both.  The depth-first relabeling that underlies all succinct
//! encodings lives here as [`lex_dfs`].

mod random;
mod text;

pub use random::{random_acyclic_dfa, random_connected_dfa, random_connected_nfa};
pub use text::{parse_automaton, parse_letter_string, write_dfa, write_nfa, LetterMap, ParsedAutomaton};

use crate::{Error, Letter, Result, State};

/// A complete deterministic finite automaton in tabular form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitDfa {
    n: u32,
    sigma: u32,
    initial: State,
    finals: Vec<bool>,
    /// Row-major: `delta[(q-1)*sigma + (c-1)]`.
    delta: Vec<State>,
}

impl ExplicitDfa {
    /// Builds from a transition table.  Entry 0 marks a missing transition
    /// and is rejected, as are out-of-range states.
    pub fn new(
        n: u32,
        sigma: u32,
        initial: State,
        finals: Vec<bool>,
        delta: Vec<State>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Validation("automaton needs at least one state".into()));
        }
        if sigma == 0 {
            return Err(Error::Validation("alphabet needs at least one letter".into()));
        }
        if initial == 0 || initial > n {
            return Err(Error::Validation(format!(
                "initial state {initial} out of range 1..={n}"
            )));
        }
        if finals.len() != n as usize {
            return Err(Error::Validation(format!(
                "final-state vector has {} entries for {n} states",
                finals.len()
            )));
        }
        if delta.len() != n as usize * sigma as usize {
            return Err(Error::Validation(format!(
                "transition table has {} entries, expected {}",
                delta.len(),
                n as usize * sigma as usize
            )));
        }
        for q in 1..=n {
            for c in 1..=sigma {
                let t = delta[((q - 1) as usize) * sigma as usize + (c - 1) as usize];
                if t == 0 {
                    return Err(Error::IncompleteTransitions { state: q, letter: c });
                }
                if t > n {
                    return Err(Error::Validation(format!(
                        "transition from {q} on {c} targets {t}, beyond {n} states"
                    )));
                }
            }
        }
        Ok(ExplicitDfa {
            n,
            sigma,
            initial,
            finals,
            delta,
        })
    }

    pub fn state_count(&self) -> u32 {
        self.n
    }

    pub fn alphabet_size(&self) -> u32 {
        self.sigma
    }

    pub fn initial(&self) -> State {
        self.initial
    }

    pub fn is_final(&self, q: State) -> bool {
        self.finals[(q - 1) as usize]
    }

    pub fn finals(&self) -> &[bool] {
        &self.finals
    }

    #[inline]
    pub fn delta(&self, q: State, c: Letter) -> State {
        self.delta[((q - 1) as usize) * self.sigma as usize + (c - 1) as usize]
    }

    pub fn delta_table(&self) -> &[State] {
        &self.delta
    }

    /// Checks initial connectivity: every state reachable from the initial
    /// state.  Completeness and ranges were already enforced at
    /// construction.
    pub fn validate(&self) -> Result<()> {
        let mut seen = vec![false; (self.n + 1) as usize];
        let mut queue = vec![self.initial];
        seen[self.initial as usize] = true;
        let mut head = 0;
        while head < queue.len() {
            let q = queue[head];
            head += 1;
            for c in 1..=self.sigma {
                let t = self.delta(q, c);
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    queue.push(t);
                }
            }
        }
        for q in 1..=self.n {
            if !seen[q as usize] {
                return Err(Error::NotConnected { state: q });
            }
        }
        Ok(())
    }

    /// Runs the automaton over `x`; the reference acceptance algorithm.
    pub fn accept(&self, x: &[Letter]) -> Result<bool> {
        let mut q = self.initial;
        for &c in x {
            if c == 0 || c > self.sigma {
                return Err(Error::LetterOutOfRange {
                    letter: c,
                    sigma: self.sigma,
                });
            }
            q = self.delta(q, c);
        }
        Ok(self.is_final(q))
    }

    /// Classifies the automaton as acyclic, returning the absorbing dead
    /// state.
    ///
    /// Acyclic here means: exactly one state is recurrent (lies on a cycle),
    /// namely a dead state that loops to itself on every letter.  All other
    /// states are transient.  Returns `None` when any other cycle exists.
    pub fn classify_acyclic(&self) -> Option<State> {
        let recurrent = self.recurrent_states();
        let dead = match recurrent.as_slice() {
            &[d] => d,
            _ => return None,
        };
        (1..=self.sigma).all(|c| self.delta(dead, c) == dead).then_some(dead)
    }

    /// States on some cycle, found by iterative Tarjan: members of a
    /// multi-state strongly connected component, plus self-loops.
    fn recurrent_states(&self) -> Vec<State> {
        let n = self.n as usize;
        let mut index = vec![0u32; n + 1];
        let mut low = vec![0u32; n + 1];
        let mut on_stack = vec![false; n + 1];
        let mut comp = vec![0u32; n + 1];
        let mut stack: Vec<State> = Vec::new();
        let mut next_index = 1u32;
        let mut next_comp = 1u32;
        let mut comp_size = vec![0u32; 1];

        for root in 1..=self.n {
            if index[root as usize] != 0 {
                continue;
            }
            let mut call: Vec<(State, u32)> = vec![(root, 0)];
            while let Some(&mut (v, ref mut ci)) = call.last_mut() {
                if *ci == 0 {
                    index[v as usize] = next_index;
                    low[v as usize] = next_index;
                    next_index += 1;
                    stack.push(v);
                    on_stack[v as usize] = true;
                }
                if *ci < self.sigma {
                    let c = *ci + 1;
                    *ci += 1;
                    let w = self.delta(v, c);
                    if index[w as usize] == 0 {
                        call.push((w, 0));
                    } else if on_stack[w as usize] {
                        low[v as usize] = low[v as usize].min(index[w as usize]);
                    }
                } else {
                    if low[v as usize] == index[v as usize] {
                        comp_size.push(0);
                        loop {
                            let w = stack.pop().expect("component members on stack");
                            on_stack[w as usize] = false;
                            comp[w as usize] = next_comp;
                            comp_size[next_comp as usize] += 1;
                            if w == v {
                                break;
                            }
                        }
                        next_comp += 1;
                    }
                    call.pop();
                    if let Some(&mut (u, _)) = call.last_mut() {
                        low[u as usize] = low[u as usize].min(low[v as usize]);
                    }
                }
            }
        }

        (1..=self.n)
            .filter(|&q| {
                comp_size[comp[q as usize] as usize] > 1
                    || (1..=self.sigma).any(|c| self.delta(q, c) == q)
            })
            .collect()
    }
}

/// A nondeterministic finite automaton with transition sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitNfa {
    n: u32,
    sigma: u32,
    initial: State,
    finals: Vec<bool>,
    /// `delta[(q-1)*sigma + (c-1)]`: sorted target sets.
    delta: Vec<Vec<State>>,
}

impl ExplicitNfa {
    /// Builds from target sets; duplicates are merged and sets sorted.
    pub fn new(
        n: u32,
        sigma: u32,
        initial: State,
        finals: Vec<bool>,
        mut delta: Vec<Vec<State>>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Validation("automaton needs at least one state".into()));
        }
        if sigma == 0 {
            return Err(Error::Validation("alphabet needs at least one letter".into()));
        }
        if initial == 0 || initial > n {
            return Err(Error::Validation(format!(
                "initial state {initial} out of range 1..={n}"
            )));
        }
        if finals.len() != n as usize {
            return Err(Error::Validation(format!(
                "final-state vector has {} entries for {n} states",
                finals.len()
            )));
        }
        if delta.len() != n as usize * sigma as usize {
            return Err(Error::Validation(format!(
                "transition table has {} rows, expected {}",
                delta.len(),
                n as usize * sigma as usize
            )));
        }
        for row in delta.iter_mut() {
            row.sort_unstable();
            row.dedup();
            if row.iter().any(|&t| t == 0 || t > n) {
                return Err(Error::Validation(format!(
                    "transition target out of range 1..={n}"
                )));
            }
        }
        Ok(ExplicitNfa {
            n,
            sigma,
            initial,
            finals,
            delta,
        })
    }

    pub fn state_count(&self) -> u32 {
        self.n
    }

    pub fn alphabet_size(&self) -> u32 {
        self.sigma
    }

    pub fn initial(&self) -> State {
        self.initial
    }

    pub fn is_final(&self, q: State) -> bool {
        self.finals[(q - 1) as usize]
    }

    pub fn finals(&self) -> &[bool] {
        &self.finals
    }

    pub fn targets(&self, q: State, c: Letter) -> &[State] {
        &self.delta[((q - 1) as usize) * self.sigma as usize + (c - 1) as usize]
    }

    /// Checks that every state is reachable from the initial state in the
    /// union graph over all letters.
    pub fn validate(&self) -> Result<()> {
        let mut seen = vec![false; (self.n + 1) as usize];
        let mut queue = vec![self.initial];
        seen[self.initial as usize] = true;
        let mut head = 0;
        while head < queue.len() {
            let q = queue[head];
            head += 1;
            for c in 1..=self.sigma {
                for &t in self.targets(q, c) {
                    if !seen[t as usize] {
                        seen[t as usize] = true;
                        queue.push(t);
                    }
                }
            }
        }
        for q in 1..=self.n {
            if !seen[q as usize] {
                return Err(Error::NotConnected { state: q });
            }
        }
        Ok(())
    }

    /// Subset simulation with a plain boolean set; the reference acceptance
    /// algorithm.
    pub fn accept(&self, x: &[Letter]) -> Result<bool> {
        let mut cur = vec![false; (self.n + 1) as usize];
        cur[self.initial as usize] = true;
        for &c in x {
            if c == 0 || c > self.sigma {
                return Err(Error::LetterOutOfRange {
                    letter: c,
                    sigma: self.sigma,
                });
            }
            let mut next = vec![false; (self.n + 1) as usize];
            for q in 1..=self.n {
                if cur[q as usize] {
                    for &t in self.targets(q, c) {
                        next[t as usize] = true;
                    }
                }
            }
            cur = next;
        }
        Ok((1..=self.n).any(|q| cur[q as usize] && self.is_final(q)))
    }
}

/// Result of the letter-ordered depth-first relabeling of a deterministic
/// automaton.
///
/// The walk starts at the initial state and explores transitions in letter
/// order, so the relabeling and every derived array are canonical for the
/// automaton.  Transitions split into `n - 1` tree edges (first arrival at
/// each non-initial state) and `(sigma-1)*n + 1` non-tree edges.
#[derive(Clone, Debug)]
pub struct LexDfsResult {
    /// Old state -> new (preorder) label; index 0 unused.
    pub relabel: Vec<State>,
    /// New label -> old state; index 0 unused.
    pub old_of: Vec<State>,
    /// Tree-edge flags in label-major order: entry `(q-1)*sigma + (c-1)` for
    /// new label `q` and letter `c`.
    pub tree_edge: Vec<bool>,
    /// The full relabeled transition table, same layout as `tree_edge`.
    pub new_delta: Vec<State>,
    /// Targets (new labels) of non-tree edges in discovery order, each with
    /// the number of states discovered when the edge was traversed.
    pub nontree_in_dfs_order: Vec<(State, u32)>,
    /// Paren string of the tree walk: open on first arrival, close on
    /// backtrack.
    pub parens: Vec<bool>,
}

impl LexDfsResult {
    /// Targets of non-tree edges in label-major order: the order of zeros
    /// in `tree_edge`.
    pub fn nontree_targets(&self) -> Vec<State> {
        self.tree_edge
            .iter()
            .zip(self.new_delta.iter())
            .filter_map(|(&tree, &t)| (!tree).then_some(t))
            .collect()
    }

    /// The input automaton with states renamed to preorder labels.
    pub fn relabeled_dfa(&self, d: &ExplicitDfa) -> ExplicitDfa {
        let n = d.state_count();
        let mut finals = vec![false; n as usize];
        for old in 1..=n {
            finals[(self.relabel[old as usize] - 1) as usize] = d.is_final(old);
        }
        ExplicitDfa::new(n, d.alphabet_size(), 1, finals, self.new_delta.clone())
            .expect("relabeling preserves validity")
    }
}

/// Depth-first traversal in letter order with preorder relabeling.
///
/// Requires a validated automaton; the traversal must discover every state.
pub fn lex_dfs(d: &ExplicitDfa) -> LexDfsResult {
    lex_dfs_table(d.state_count(), d.alphabet_size(), d.initial(), d.delta_table())
        .expect("validated automaton is initially connected")
}

/// [`lex_dfs`] over a raw table where entry 0 marks an absent edge.  Absent
/// edges are recorded as non-tree edges with target 0; the walk must still
/// discover every state through the present edges.
pub(crate) fn lex_dfs_table(
    n: u32,
    sigma: u32,
    initial: State,
    delta: &[State],
) -> Result<LexDfsResult> {
    let table = n as usize * sigma as usize;
    debug_assert_eq!(delta.len(), table);

    let mut relabel = vec![0 as State; (n + 1) as usize];
    let mut old_of = vec![0 as State; (n + 1) as usize];
    let mut tree_edge = vec![false; table];
    let mut new_delta = vec![0 as State; table];
    let mut nontree = Vec::with_capacity((table - (n as usize - 1)).max(1));
    let mut parens = Vec::with_capacity(2 * n as usize);

    let mut count = 1 as State;
    relabel[initial as usize] = 1;
    old_of[1] = initial;
    parens.push(true);
    // Frames: (old state, its new label, next letter to expand).
    let mut stack: Vec<(State, State, Letter)> = vec![(initial, 1, 1)];

    while let Some(&mut (old, label, ref mut next_c)) = stack.last_mut() {
        if *next_c > sigma {
            parens.push(false);
            stack.pop();
            continue;
        }
        let c = *next_c;
        *next_c += 1;
        let t_old = delta[(old as usize - 1) * sigma as usize + (c as usize - 1)];
        let slot = ((label - 1) as usize) * sigma as usize + (c - 1) as usize;
        if t_old == 0 {
            nontree.push((0, count));
        } else if relabel[t_old as usize] == 0 {
            count += 1;
            relabel[t_old as usize] = count;
            old_of[count as usize] = t_old;
            tree_edge[slot] = true;
            new_delta[slot] = count;
            parens.push(true);
            stack.push((t_old, count, 1));
        } else {
            new_delta[slot] = relabel[t_old as usize];
            nontree.push((relabel[t_old as usize], count));
        }
    }

    if count < n {
        let missing = (1..=n).find(|&q| relabel[q as usize] == 0).unwrap();
        return Err(Error::NotConnected { state: missing });
    }
    Ok(LexDfsResult {
        relabel,
        old_of,
        tree_edge,
        new_delta,
        nontree_in_dfs_order: nontree,
        parens,
    })
}
