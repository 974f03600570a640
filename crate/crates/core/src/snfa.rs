//! Succinct nondeterministic automaton: one bit per (state, letter, state)
//! triple and nothing else.
//!
//! Row (q,c) of the matrix is the characteristic vector of the target set
//! δ(q,c), so the matrix holds exactly σn² bits.  Acceptance keeps the
//! current state set as one n-bit vector and builds the next set in a
//! second one by OR-ing the rows of the set members: 2n bits of working
//! space, O(n²) word-parallel work per input symbol.

use std::collections::VecDeque;

use crate::automaton::ExplicitNfa;
use crate::bits::{read_bits, Bitvector};
use crate::{Error, Letter, Result, State};

/// Per-section bit counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuccinctNfaSpace {
    /// Exactly σn².
    pub matrix_bits: u64,
    /// Exactly n.
    pub finals_bits: u64,
    pub directory_bits: u64,
}

impl SuccinctNfaSpace {
    pub fn payload_bits(&self) -> u64 {
        self.matrix_bits + self.finals_bits
    }
}

/// The two n-bit vectors the subset simulation works in.  Reusable across
/// calls so long runs allocate nothing per string.
#[derive(Clone, Debug)]
pub struct SubsetScratch {
    n: u32,
    current: Vec<u64>,
    next: Vec<u64>,
}

impl SubsetScratch {
    pub fn new(n: u32) -> Self {
        let words = (n as usize).div_ceil(64);
        SubsetScratch {
            n,
            current: vec![0; words],
            next: vec![0; words],
        }
    }

    /// Logical working size: two vectors of n bits each.
    pub fn scratch_bits(&self) -> u64 {
        2 * self.n as u64
    }

    /// Number of scratch vectors, for the working-space audit.
    pub fn vector_count(&self) -> usize {
        2
    }
}

/// Succinct nondeterministic automaton over states 1..n.
#[derive(Clone, Debug)]
pub struct SuccinctNfa {
    n: u32,
    sigma: u32,
    initial: State,
    /// Row (q,c) starts at bit ((q−1)σ + (c−1))·n; bit t−1 set iff t ∈ δ(q,c).
    rows: Vec<u64>,
    finals: Bitvector,
}

impl SuccinctNfa {
    /// Encodes a validated automaton.  Labels are kept as they are; no
    /// relabeling is involved.
    pub fn build(nf: &ExplicitNfa) -> Result<Self> {
        nf.validate()?;
        let n = nf.state_count();
        let sigma = nf.alphabet_size();
        let bits = sigma as u64 * n as u64 * n as u64;
        let mut rows = vec![0u64; (bits as usize).div_ceil(64)];
        for q in 1..=n {
            for c in 1..=sigma {
                let start = ((q as u64 - 1) * sigma as u64 + (c as u64 - 1)) * n as u64;
                for &t in nf.targets(q, c) {
                    let bit = start + t as u64 - 1;
                    rows[(bit / 64) as usize] |= 1u64 << (bit % 64);
                }
            }
        }
        Ok(SuccinctNfa {
            n,
            sigma,
            initial: nf.initial(),
            rows,
            finals: Bitvector::from_bools(nf.finals()),
        })
    }

    pub fn state_count(&self) -> u32 {
        self.n
    }

    pub fn alphabet_size(&self) -> u32 {
        self.sigma
    }

    pub fn initial_state(&self) -> State {
        self.initial
    }

    pub fn is_final(&self, q: State) -> Result<bool> {
        self.finals.get(q as u64)
    }

    /// The matrix bit: is `t` in δ(q,c)?
    pub fn row_contains(&self, q: State, c: Letter, t: State) -> Result<bool> {
        self.check_state(q)?;
        self.check_letter(c)?;
        self.check_state(t)?;
        let bit = ((q as u64 - 1) * self.sigma as u64 + (c as u64 - 1)) * self.n as u64
            + t as u64
            - 1;
        Ok(self.rows[(bit / 64) as usize] >> (bit % 64) & 1 == 1)
    }

    fn check_state(&self, q: State) -> Result<()> {
        if q == 0 || q > self.n {
            return Err(Error::OutOfRange {
                what: "state",
                index: q as u64,
                limit: self.n as u64,
            });
        }
        Ok(())
    }

    fn check_letter(&self, c: Letter) -> Result<()> {
        if c == 0 || c > self.sigma {
            return Err(Error::LetterOutOfRange {
                letter: c,
                sigma: self.sigma,
            });
        }
        Ok(())
    }

    /// OR the rows (q,c) of all states q set in `from` into `into`.
    pub(crate) fn step(&self, from: &[u64], into: &mut [u64], c: Letter) {
        into.fill(0);
        let n = self.n as u64;
        for (w, &word) in from.iter().enumerate() {
            let mut word = word;
            while word != 0 {
                let q = w as u64 * 64 + word.trailing_zeros() as u64; // 0-based
                word &= word - 1;
                let start = (q * self.sigma as u64 + (c as u64 - 1)) * n;
                let mut off = 0u64;
                while off < n {
                    let width = (n - off).min(64) as u32;
                    into[(off / 64) as usize] |= read_bits(&self.rows, start + off, width);
                    off += 64;
                }
            }
        }
    }

    /// Subset simulation in the caller's scratch vectors.
    pub fn accept_with(&self, scratch: &mut SubsetScratch, x: &[Letter]) -> Result<bool> {
        if scratch.n != self.n {
            return Err(Error::Validation(format!(
                "scratch sized for {} states, automaton has {}",
                scratch.n, self.n
            )));
        }
        scratch.current.fill(0);
        let init = self.initial as u64 - 1;
        scratch.current[(init / 64) as usize] |= 1u64 << (init % 64);
        for &c in x {
            self.check_letter(c)?;
            self.step(&scratch.current, &mut scratch.next, c);
            std::mem::swap(&mut scratch.current, &mut scratch.next);
        }
        Ok(scratch
            .current
            .iter()
            .zip(self.finals.words())
            .any(|(&cw, &fw)| cw & fw != 0))
    }

    /// Subset simulation with fresh scratch.
    pub fn accept(&self, x: &[Letter]) -> Result<bool> {
        self.accept_with(&mut SubsetScratch::new(self.n), x)
    }

    pub fn space(&self) -> SuccinctNfaSpace {
        SuccinctNfaSpace {
            matrix_bits: self.sigma as u64 * self.n as u64 * self.n as u64,
            finals_bits: self.finals.len(),
            directory_bits: self.finals.directory_bits(),
        }
    }

    pub(crate) fn rows_words(&self) -> &[u64] {
        &self.rows
    }

    pub(crate) fn finals_bits(&self) -> &Bitvector {
        &self.finals
    }

    /// Rebuilds from deserialized sections; checks the shape, that no bit
    /// strays beyond σn², and that every state is reachable.
    pub(crate) fn from_parts(
        n: u32,
        sigma: u32,
        initial: State,
        rows: Vec<u64>,
        finals: Bitvector,
    ) -> Result<Self> {
        let fail = |msg: String| Err(Error::Integrity(msg));
        if n == 0 || sigma == 0 {
            return fail("empty automaton".into());
        }
        if initial == 0 || initial > n {
            return fail(format!("initial state {initial} out of range"));
        }
        if finals.len() != n as u64 {
            return fail(format!("final section has {} bits for {n} states", finals.len()));
        }
        let bits = sigma as u64 * n as u64 * n as u64;
        if rows.len() != (bits as usize).div_ceil(64) {
            return fail(format!(
                "matrix section has {} words for {bits} bits",
                rows.len()
            ));
        }
        if bits % 64 != 0 {
            let tail = rows[rows.len() - 1] >> (bits % 64);
            if tail != 0 {
                return fail("matrix section has bits beyond its declared size".into());
            }
        }
        let s = SuccinctNfa {
            n,
            sigma,
            initial,
            rows,
            finals,
        };
        // Reachability over the union of all letter rows.
        let mut seen = vec![false; n as usize + 1];
        seen[initial as usize] = true;
        let mut visited = 1u32;
        let mut queue = VecDeque::from([initial]);
        while let Some(q) = queue.pop_front() {
            for c in 1..=sigma {
                for t in 1..=n {
                    if !seen[t as usize] && s.row_contains(q, c, t)? {
                        seen[t as usize] = true;
                        visited += 1;
                        queue.push_back(t);
                    }
                }
            }
        }
        if visited != n {
            return fail(format!("only {visited} of {n} states reachable"));
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::random_connected_nfa;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn minimal_matrices() {
        let with_loop = ExplicitNfa::new(1, 1, 1, vec![true], vec![vec![1]]).unwrap();
        let s = SuccinctNfa::build(&with_loop).unwrap();
        assert!(s.row_contains(1, 1, 1).unwrap());
        assert_eq!(s.space().matrix_bits, 1);
        assert!(s.accept(&[1, 1]).unwrap());

        let empty = ExplicitNfa::new(1, 1, 1, vec![true], vec![vec![]]).unwrap();
        let s = SuccinctNfa::build(&empty).unwrap();
        assert!(!s.row_contains(1, 1, 1).unwrap());
        assert!(s.accept(&[]).unwrap());
        assert!(!s.accept(&[1]).unwrap());
    }

    #[test]
    fn matrix_bits_mirror_target_sets() {
        let mut rng = StdRng::seed_from_u64(0x11FA);
        for trial in 0..40u64 {
            let n = rng.random_range(1..=12);
            let sigma = [1u32, 2, 3][trial as usize % 3];
            let nf = random_connected_nfa(n, sigma, 0.3, 0.4, trial);
            let s = SuccinctNfa::build(&nf).unwrap();
            assert_eq!(s.space().matrix_bits, sigma as u64 * (nf.state_count() as u64).pow(2));
            for q in 1..=nf.state_count() {
                for c in 1..=sigma {
                    for t in 1..=nf.state_count() {
                        assert_eq!(
                            s.row_contains(q, c, t).unwrap(),
                            nf.targets(q, c).contains(&t)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn accepts_like_the_oracle() {
        let mut rng = StdRng::seed_from_u64(0xF00);
        for trial in 0..40u64 {
            let nf = random_connected_nfa(rng.random_range(1..=15), 2, 0.25, 0.4, 0xAB + trial);
            let s = SuccinctNfa::build(&nf).unwrap();
            let mut scratch = SubsetScratch::new(nf.state_count());
            for _ in 0..60 {
                let len = rng.random_range(0..=20);
                let x: Vec<u32> = (0..len).map(|_| rng.random_range(1..=2)).collect();
                assert_eq!(
                    s.accept_with(&mut scratch, &x).unwrap(),
                    nf.accept(&x).unwrap()
                );
            }
        }
    }

    #[test]
    fn exhaustive_short_strings_small_instances() {
        for trial in 0..15u64 {
            let nf = random_connected_nfa(6, 2, 0.3, 0.4, 0xE0 + trial);
            let s = SuccinctNfa::build(&nf).unwrap();
            let mut scratch = SubsetScratch::new(nf.state_count());
            for len in 0..=6u32 {
                for code in 0..2u32.pow(len) {
                    let x: Vec<u32> = (0..len).map(|i| (code >> i & 1) + 1).collect();
                    assert_eq!(
                        s.accept_with(&mut scratch, &x).unwrap(),
                        nf.accept(&x).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn stepping_is_monotone_in_the_state_set() {
        let mut rng = StdRng::seed_from_u64(0x111);
        for trial in 0..20u64 {
            let nf = random_connected_nfa(70, 3, 0.1, 0.3, trial);
            let n = nf.state_count();
            let s = SuccinctNfa::build(&nf).unwrap();
            let words = (n as usize).div_ceil(64);
            for _ in 0..20 {
                let mut small = vec![0u64; words];
                let mut large = vec![0u64; words];
                for q in 0..n as u64 {
                    if rng.random_bool(0.2) {
                        small[(q / 64) as usize] |= 1 << (q % 64);
                    }
                    if rng.random_bool(0.3) {
                        large[(q / 64) as usize] |= 1 << (q % 64);
                    }
                }
                for (s_w, l_w) in small.iter_mut().zip(&large) {
                    *s_w &= l_w; // force small ⊆ large
                }
                let c = rng.random_range(1..=3);
                let mut small_next = vec![0u64; words];
                let mut large_next = vec![0u64; words];
                s.step(&small, &mut small_next, c);
                s.step(&large, &mut large_next, c);
                for (sn, ln) in small_next.iter().zip(&large_next) {
                    assert_eq!(sn & ln, *sn, "step must preserve inclusion");
                }
            }
        }
    }

    #[test]
    fn scratch_is_two_state_set_vectors() {
        let scratch = SubsetScratch::new(130);
        assert_eq!(scratch.vector_count(), 2);
        assert_eq!(scratch.scratch_bits(), 260);
        assert_eq!(scratch.current.len(), 3);
        assert_eq!(scratch.next.len(), 3);

        let nf = random_connected_nfa(9, 2, 0.4, 0.5, 3);
        let s = SuccinctNfa::build(&nf).unwrap();
        assert!(s.accept_with(&mut SubsetScratch::new(5), &[1]).is_err());
    }

    #[test]
    fn letters_out_of_range_error() {
        let nf = random_connected_nfa(4, 2, 0.5, 0.5, 8);
        let s = SuccinctNfa::build(&nf).unwrap();
        assert!(s.accept(&[3]).is_err());
        assert!(s.accept(&[0]).is_err());
        assert!(s.row_contains(1, 3, 1).is_err());
        assert!(s.row_contains(0, 1, 1).is_err());
    }
}
