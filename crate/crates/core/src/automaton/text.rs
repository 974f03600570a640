//! Line-oriented text format for explicit automata.
//!
//! ```text
//! # comment
//! dfa <n> <sigma>          (or: nfa <n> <sigma>)
//! letters <t1> ... <tσ>    (optional; tokens name letters 1..σ in order)
//! initial <q>
//! final <q1> <q2> ...
//! trans <q> <letter> <q'>
//! ```
//!
//! A deterministic automaton needs exactly one `trans` line per state and
//! letter; a nondeterministic one takes zero or more per pair.  Without a
//! `letters` line, letters are written as the decimal values 1..σ.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{ExplicitDfa, ExplicitNfa};
use crate::{Error, Letter, Result};

/// Maps letter tokens in text input to the internal values 1..σ.
///
/// Numeric maps accept the decimal strings "1".."σ"; symbolic maps accept
/// exactly the declared tokens, in declaration order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LetterMap {
    sigma: u32,
    tokens: Option<Vec<String>>,
}

impl LetterMap {
    /// Plain decimal letters 1..=sigma.
    pub fn numeric(sigma: u32) -> Self {
        LetterMap { sigma, tokens: None }
    }

    /// One token per letter, in order.  Tokens must be distinct, non-empty,
    /// and free of whitespace and `#`.
    pub fn symbolic(tokens: Vec<String>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::Validation("letter map needs at least one token".into()));
        }
        for t in &tokens {
            if t.is_empty() || t.chars().any(|ch| ch.is_whitespace() || ch == '#') {
                return Err(Error::Validation(format!("invalid letter token {t:?}")));
            }
        }
        let mut seen = tokens.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != tokens.len() {
            return Err(Error::Validation("duplicate letter token".into()));
        }
        Ok(LetterMap {
            sigma: tokens.len() as u32,
            tokens: Some(tokens),
        })
    }

    pub fn sigma(&self) -> u32 {
        self.sigma
    }

    /// Declared tokens, or `None` for a numeric map.
    pub fn tokens(&self) -> Option<&[String]> {
        self.tokens.as_deref()
    }

    /// Resolves one token to a letter value.
    pub fn resolve(&self, token: &str) -> Result<Letter> {
        match &self.tokens {
            Some(tokens) => tokens
                .iter()
                .position(|t| t == token)
                .map(|i| i as Letter + 1)
                .ok_or_else(|| Error::Validation(format!("unknown letter {token:?}"))),
            None => {
                let c: Letter = token
                    .parse()
                    .map_err(|_| Error::Validation(format!("unknown letter {token:?}")))?;
                if c == 0 || c > self.sigma {
                    return Err(Error::LetterOutOfRange {
                        letter: c,
                        sigma: self.sigma,
                    });
                }
                Ok(c)
            }
        }
    }

    /// The token written for a letter value.
    pub fn name(&self, c: Letter) -> String {
        debug_assert!(c >= 1 && c <= self.sigma);
        match &self.tokens {
            Some(tokens) => tokens[c as usize - 1].clone(),
            None => c.to_string(),
        }
    }
}

/// Either kind of parsed automaton.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParsedAutomaton {
    Dfa(ExplicitDfa),
    Nfa(ExplicitNfa),
}

impl ParsedAutomaton {
    pub fn state_count(&self) -> u32 {
        match self {
            ParsedAutomaton::Dfa(d) => d.state_count(),
            ParsedAutomaton::Nfa(m) => m.state_count(),
        }
    }

    pub fn alphabet_size(&self) -> u32 {
        match self {
            ParsedAutomaton::Dfa(d) => d.alphabet_size(),
            ParsedAutomaton::Nfa(m) => m.alphabet_size(),
        }
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_u32(tok: &str, line: usize, what: &str) -> Result<u32> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("{what} must be a decimal integer, got {tok:?}")))
}

fn parse_state(tok: &str, n: u32, line: usize) -> Result<u32> {
    let q = parse_u32(tok, line, "state")?;
    if q == 0 || q > n {
        return Err(parse_err(line, format!("state {q} out of range 1..={n}")));
    }
    Ok(q)
}

/// Parses the text format.  Line numbers in errors are 1-based.
pub fn parse_automaton(input: &str) -> Result<(ParsedAutomaton, LetterMap)> {
    let mut header: Option<(bool, u32, u32, usize)> = None; // (is_dfa, n, sigma, line)
    let mut letters: Option<LetterMap> = None;
    let mut initial: Option<u32> = None;
    let mut finals_line: Option<Vec<u32>> = None;
    // (line, q, c, target); letters resolved on the spot, so `letters` must
    // precede every `trans` line.
    let mut trans: Vec<(usize, u32, u32, u32)> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in input.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let body = raw.split('#').next().unwrap_or("");
        let mut toks = body.split_whitespace();
        let Some(keyword) = toks.next() else { continue };
        let rest: Vec<&str> = toks.collect();

        if header.is_none() {
            let is_dfa = match keyword {
                "dfa" => true,
                "nfa" => false,
                _ => {
                    return Err(parse_err(
                        line,
                        format!("expected `dfa <n> <sigma>` or `nfa <n> <sigma>`, got `{keyword}`"),
                    ))
                }
            };
            let [n_tok, sigma_tok] = rest[..] else {
                return Err(parse_err(line, format!("`{keyword}` takes <n> <sigma>")));
            };
            let n = parse_u32(n_tok, line, "state count")?;
            let sigma = parse_u32(sigma_tok, line, "alphabet size")?;
            if n == 0 || sigma == 0 {
                return Err(parse_err(line, "state count and alphabet size must be positive"));
            }
            header = Some((is_dfa, n, sigma, line));
            continue;
        }
        let (_, n, sigma, _) = header.unwrap();

        match keyword {
            "letters" => {
                if letters.is_some() {
                    return Err(parse_err(line, "duplicate `letters` line"));
                }
                if !trans.is_empty() {
                    return Err(parse_err(line, "`letters` must come before `trans` lines"));
                }
                if rest.len() != sigma as usize {
                    return Err(parse_err(
                        line,
                        format!("`letters` needs exactly {sigma} tokens, got {}", rest.len()),
                    ));
                }
                let map = LetterMap::symbolic(rest.iter().map(|t| t.to_string()).collect())
                    .map_err(|e| parse_err(line, e.to_string()))?;
                letters = Some(map);
            }
            "initial" => {
                if initial.is_some() {
                    return Err(parse_err(line, "duplicate `initial` line"));
                }
                let [q_tok] = rest[..] else {
                    return Err(parse_err(line, "`initial` takes one state"));
                };
                initial = Some(parse_state(q_tok, n, line)?);
            }
            "final" => {
                if finals_line.is_some() {
                    return Err(parse_err(line, "duplicate `final` line"));
                }
                let mut qs = Vec::with_capacity(rest.len());
                for tok in &rest {
                    qs.push(parse_state(tok, n, line)?);
                }
                finals_line = Some(qs);
            }
            "trans" => {
                let [q_tok, c_tok, t_tok] = rest[..] else {
                    return Err(parse_err(line, "`trans` takes <state> <letter> <state>"));
                };
                let q = parse_state(q_tok, n, line)?;
                let map = letters.clone().unwrap_or(LetterMap::numeric(sigma));
                let c = map
                    .resolve(c_tok)
                    .map_err(|e| parse_err(line, e.to_string()))?;
                let t = parse_state(t_tok, n, line)?;
                trans.push((line, q, c, t));
            }
            other => {
                return Err(parse_err(line, format!("unknown directive `{other}`")));
            }
        }
    }

    let Some((is_dfa, n, sigma, _)) = header else {
        return Err(parse_err(last_line, "missing `dfa` or `nfa` header"));
    };
    let map = letters.unwrap_or(LetterMap::numeric(sigma));
    let Some(initial) = initial else {
        return Err(parse_err(last_line, "missing `initial` line"));
    };
    let mut finals = vec![false; n as usize];
    for q in finals_line.unwrap_or_default() {
        finals[q as usize - 1] = true;
    }

    let automaton = if is_dfa {
        let mut delta = vec![0u32; n as usize * sigma as usize];
        let mut defined_at: HashMap<(u32, u32), usize> = HashMap::new();
        for (line, q, c, t) in trans {
            if let Some(prev) = defined_at.insert((q, c), line) {
                return Err(parse_err(
                    line,
                    format!(
                        "duplicate transition for state {q} letter {} (first on line {prev})",
                        map.name(c)
                    ),
                ));
            }
            delta[(q as usize - 1) * sigma as usize + (c as usize - 1)] = t;
        }
        ParsedAutomaton::Dfa(ExplicitDfa::new(n, sigma, initial, finals, delta)?)
    } else {
        let mut delta = vec![Vec::new(); n as usize * sigma as usize];
        for (_, q, c, t) in trans {
            delta[(q as usize - 1) * sigma as usize + (c as usize - 1)].push(t);
        }
        ParsedAutomaton::Nfa(ExplicitNfa::new(n, sigma, initial, finals, delta)?)
    };
    Ok((automaton, map))
}

fn write_preamble(out: &mut String, kind: &str, n: u32, sigma: u32, initial: u32, finals: &[bool], map: &LetterMap) {
    let _ = writeln!(out, "{kind} {n} {sigma}");
    if let Some(tokens) = map.tokens() {
        let _ = writeln!(out, "letters {}", tokens.join(" "));
    }
    let _ = writeln!(out, "initial {initial}");
    let listed: Vec<String> = (1..=n).filter(|&q| finals[q as usize - 1]).map(|q| q.to_string()).collect();
    if listed.is_empty() {
        let _ = writeln!(out, "final");
    } else {
        let _ = writeln!(out, "final {}", listed.join(" "));
    }
}

/// Renders a DFA in the text format: states ascending, letters ascending.
/// `parse_automaton` on the output reproduces the automaton.
pub fn write_dfa(d: &ExplicitDfa, map: &LetterMap) -> String {
    let mut out = String::new();
    write_preamble(&mut out, "dfa", d.state_count(), d.alphabet_size(), d.initial(), d.finals(), map);
    for q in 1..=d.state_count() {
        for c in 1..=d.alphabet_size() {
            let _ = writeln!(out, "trans {q} {} {}", map.name(c), d.delta(q, c));
        }
    }
    out
}

/// Renders an NFA in the text format: states, letters, then targets ascending.
pub fn write_nfa(m: &ExplicitNfa, map: &LetterMap) -> String {
    let mut out = String::new();
    write_preamble(&mut out, "nfa", m.state_count(), m.alphabet_size(), m.initial(), m.finals(), map);
    for q in 1..=m.state_count() {
        for c in 1..=m.alphabet_size() {
            for &t in m.targets(q, c) {
                let _ = writeln!(out, "trans {q} {} {t}", map.name(c));
            }
        }
    }
    out
}

/// Parses an input string into letters.  A string containing whitespace is
/// split into tokens; otherwise each character is resolved on its own, so
/// multi-character letter tokens need space separation.  Empty means the
/// empty string.
pub fn parse_letter_string(s: &str, map: &LetterMap) -> Result<Vec<Letter>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    if s.chars().any(char::is_whitespace) {
        s.split_whitespace().map(|tok| map.resolve(tok)).collect()
    } else {
        s.chars()
            .map(|ch| map.resolve(ch.encode_utf8(&mut [0u8; 4])))
            .collect()
    }
}
