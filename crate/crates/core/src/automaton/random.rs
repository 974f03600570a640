//! Seeded random automata for tests and benchmarks.
//!
//! All generators draw from a ChaCha stream cipher keyed by the caller's
//! seed, so a given `(parameters, seed)` pair produces the same automaton on
//! every platform.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use super::{ExplicitDfa, ExplicitNfa};
use crate::{Letter, State};

/// Random complete DFA, restricted to the states reachable from state 1 and
/// relabeled by discovery order.  The result may therefore have fewer than
/// `n` states; it is always initially connected.  Final states are drawn
/// with the given density, redrawn until non-empty (density 0 forces exactly
/// one).
pub fn random_connected_dfa(n: u32, sigma: u32, final_density: f64, seed: u64) -> ExplicitDfa {
    assert!(n >= 1 && sigma >= 1);
    assert!((0.0..=1.0).contains(&final_density));
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    let table: Vec<State> = (0..n as usize * sigma as usize)
        .map(|_| rng.random_range(1..=n))
        .collect();

    // Keep the reachable part, relabeled by breadth-first discovery order.
    let mut relabel = vec![0 as State; (n + 1) as usize];
    let mut old_of = vec![0 as State];
    relabel[1] = 1;
    old_of.push(1);
    let mut head = 0;
    while head < old_of.len() - 1 {
        head += 1;
        let q = old_of[head];
        for c in 1..=sigma {
            let t = table[((q - 1) as usize) * sigma as usize + (c - 1) as usize];
            if relabel[t as usize] == 0 {
                relabel[t as usize] = old_of.len() as State;
                old_of.push(t);
            }
        }
    }
    let m = (old_of.len() - 1) as u32;
    let mut delta = Vec::with_capacity(m as usize * sigma as usize);
    for new_q in 1..=m {
        let old_q = old_of[new_q as usize];
        for c in 1..=sigma {
            let t = table[((old_q - 1) as usize) * sigma as usize + (c - 1) as usize];
            delta.push(relabel[t as usize]);
        }
    }

    let finals = draw_finals(&mut rng, m, final_density);
    let d = ExplicitDfa::new(m, sigma, 1, finals, delta).expect("generated table is complete");
    debug_assert!(d.validate().is_ok());
    d
}

fn draw_finals(rng: &mut ChaCha12Rng, n: u32, density: f64) -> Vec<bool> {
    if density > 0.0 {
        loop {
            let finals: Vec<bool> = (0..n).map(|_| rng.random_bool(density)).collect();
            if finals.iter().any(|&b| b) {
                return finals;
            }
        }
    }
    let mut finals = vec![false; n as usize];
    finals[rng.random_range(0..n) as usize] = true;
    finals
}

/// Random acyclic DFA with exactly `n` states: transients `1..n` whose
/// transitions only move to later states or to the absorbing dead state `n`.
///
/// Connectivity is forced by threading each state `i >= 2` from a uniformly
/// chosen earlier free slot.  Final states are drawn among the transients
/// (the dead state stays non-final); for `n == 1` the language is empty.
pub fn random_acyclic_dfa(n: u32, sigma: u32, final_density: f64, seed: u64) -> ExplicitDfa {
    assert!(n >= 1 && sigma >= 1);
    assert!((0.0..=1.0).contains(&final_density));
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let idx = |q: State, c: Letter| ((q - 1) as usize) * sigma as usize + (c - 1) as usize;

    let mut delta = vec![0 as State; n as usize * sigma as usize];
    for c in 1..=sigma {
        delta[idx(n, c)] = n;
    }
    for q in 1..n {
        for c in 1..=sigma {
            delta[idx(q, c)] = rng.random_range(q + 1..=n);
        }
    }
    // Thread each interior state from an unforced earlier slot so the whole
    // automaton hangs off state 1.  With one letter the only acyclic
    // connected shape is the chain, which the threading below would find
    // slowly, so take it directly.
    if sigma == 1 {
        for q in 1..n {
            delta[idx(q, 1)] = q + 1;
        }
    } else {
        let mut forced = vec![false; n as usize * sigma as usize];
        for q in 2..n {
            loop {
                let p = rng.random_range(1..q);
                let c = rng.random_range(1..=sigma);
                if !forced[idx(p, c)] {
                    forced[idx(p, c)] = true;
                    delta[idx(p, c)] = q;
                    break;
                }
            }
        }
        // The dead state must be reachable too; thread it through a free
        // slot when the random draws missed it.
        if n >= 2 && !(1..n).any(|q| (1..=sigma).any(|c| delta[idx(q, c)] == n)) {
            loop {
                let p = rng.random_range(1..n);
                let c = rng.random_range(1..=sigma);
                if !forced[idx(p, c)] {
                    delta[idx(p, c)] = n;
                    break;
                }
            }
        }
    }

    let mut finals = vec![false; n as usize];
    if n >= 2 {
        loop {
            for q in 0..(n - 1) as usize {
                finals[q] = rng.random_bool(final_density);
            }
            if final_density == 0.0 {
                finals[rng.random_range(0..n - 1) as usize] = true;
            }
            if finals.iter().any(|&b| b) {
                break;
            }
        }
    }

    let d = ExplicitDfa::new(n, sigma, 1, finals, delta).expect("generated table is complete");
    debug_assert!(d.validate().is_ok(), "threading left a state unreachable");
    debug_assert_eq!(d.classify_acyclic(), Some(n));
    d
}

/// Random NFA with exactly `n` states: each `(state, letter, target)` edge
/// present with probability `edge_density`, plus a spine that keeps the
/// union graph connected from state 1.
pub fn random_connected_nfa(
    n: u32,
    sigma: u32,
    edge_density: f64,
    final_density: f64,
    seed: u64,
) -> ExplicitNfa {
    assert!(n >= 1 && sigma >= 1);
    assert!((0.0..=1.0).contains(&edge_density) && (0.0..=1.0).contains(&final_density));
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    let mut delta: Vec<Vec<State>> = vec![Vec::new(); n as usize * sigma as usize];
    for q in 1..=n {
        for c in 1..=sigma {
            let row = &mut delta[((q - 1) as usize) * sigma as usize + (c - 1) as usize];
            for t in 1..=n {
                if rng.random_bool(edge_density) {
                    row.push(t);
                }
            }
        }
    }
    for t in 2..=n {
        let q = rng.random_range(1..t);
        let c = rng.random_range(1..=sigma);
        delta[((q - 1) as usize) * sigma as usize + (c - 1) as usize].push(t);
    }

    let finals = draw_finals(&mut rng, n, final_density);
    let nf = ExplicitNfa::new(n, sigma, 1, finals, delta).expect("generated rows are in range");
    debug_assert!(nf.validate().is_ok());
    nf
}
