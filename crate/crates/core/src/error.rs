use thiserror::Error;

/// Errors reported by builders, queries, and the container codec.
///
/// Variants fall into three groups, which the command-line tool maps to
/// distinct exit codes: query errors for out-of-range positions or letters,
/// validation errors for inputs that violate a builder precondition, and
/// integrity errors for malformed serialized containers.
#[derive(Debug, Error)]
pub enum Error {
    /// A position, index, or count argument fell outside the valid range.
    #[error("{what} {index} out of range, limit {limit}")]
    OutOfRange {
        what: &'static str,
        index: u64,
        limit: u64,
    },

    /// A query letter outside `1..=sigma`.
    #[error("letter {letter} out of range for alphabet size {sigma}")]
    LetterOutOfRange { letter: u32, sigma: u32 },

    /// A state not reachable from the initial state.
    #[error("state {state} is not reachable from the initial state")]
    NotConnected { state: u32 },

    /// A deterministic automaton with a missing transition.
    #[error("missing transition from state {state} on letter {letter}")]
    IncompleteTransitions { state: u32, letter: u32 },

    /// The automaton has a cycle through a non-absorbing state.
    #[error("automaton is not acyclic: recurrent states other than a single absorbing dead state")]
    NotAcyclic,

    /// The operation requires an alphabet of at least two letters.
    #[error("alphabet size {sigma} not supported by this encoding (requires sigma >= 2)")]
    UnsupportedAlphabet { sigma: u32 },

    /// Binary operation on automata over different alphabets.
    #[error("alphabet size mismatch: {left} vs {right}")]
    AlphabetMismatch { left: u32, right: u32 },

    /// A boxed-diagram decode ran off the rails: the input did not describe
    /// a valid automaton.
    #[error("diagram decode failed: {0}")]
    Decode(String),

    /// A builder precondition was violated.
    #[error("validation failed: {0}")]
    Validation(String),

    /// A text-format parse error, with a 1-based line number.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A serialized container that is malformed or internally inconsistent.
    #[error("container integrity: {0}")]
    Integrity(String),
}

pub type Result<T> = std::result::Result<T, Error>;
