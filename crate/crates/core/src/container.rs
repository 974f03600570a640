//! One-file binary format for every compressed automaton.
//!
//! A container starts with the magic "SAUT", a format version, a
//! representation tag, and a section table of (kind, offset, length)
//! triples; the section bodies follow.  Offsets are relative to the end of
//! the table, must lie in bounds, and must not overlap.  All integers are
//! little-endian; all bit payloads are stored LSB-first, matching the word
//! layout of the in-memory structures, so writing the same automaton twice
//! produces identical bytes.
//!
//! Every representation carries a META section holding its shape (state
//! count, alphabet size, initial label) and the letter map of the source
//! text, so symbolic inputs keep their spelling across tools.  Bitvector
//! sections use a common "SBIT" record (plain, monotone, or sparse); packed
//! integer sections use a "PVEC" record; the parenthesis tree stores its
//! string as a plain bitvector plus its block-summary directory, which is
//! revalidated against a rebuild on load.

use crate::automaton::LetterMap;
use crate::bits::{Bitvector, MonotoneSequence, SparseBitvector};
use crate::bptree::{BpTree, ExcessNode};
use crate::dyckcodec::{decode_dyck, DyckBoxedDiagram, FailureCompressedBoxed};
use crate::packedvec::PackedVector;
use crate::sadfa::SuccinctAcyclicDfa;
use crate::sdfa::{SuccinctDfa, SuccinctDfaFailure, TreeFlags};
use crate::snfa::SuccinctNfa;
use crate::{Error, Letter, Result};

const OUTER_MAGIC: &[u8; 4] = b"SAUT";
const CONTAINER_VERSION: u16 = 1;
const BITS_MAGIC: &[u8; 4] = b"SBIT";
const BITS_VERSION: u16 = 1;
const PACKED_MAGIC: &[u8; 4] = b"PVEC";
const META_VERSION: u16 = 1;

/// Representation tags, one per container kind.
const TAG_SDFA: u8 = 0;
const TAG_SADFA: u8 = 1;
const TAG_SNFA: u8 = 2;
const TAG_DYCK: u8 = 3;

/// Section kinds.
const SEC_META: u8 = 0;
const SEC_FINALS: u8 = 1;
const SEC_TREE: u8 = 2;
const SEC_TREE_DIR: u8 = 3;
const SEC_FLAGS: u8 = 4;
const SEC_TARGETS: u8 = 5;
const SEC_MASK: u8 = 6;
const SEC_TABLE: u8 = 7;
const SEC_MATRIX: u8 = 8;
const SEC_MAX: u8 = 9;
const SEC_BOXED: u8 = 10;

/// Bit-payload flavors inside an "SBIT" record.
const BITS_PLAIN: u8 = 0;
const BITS_MONOTONE: u8 = 1;
const BITS_SPARSE: u8 = 2;

/// META flag bit: deterministic automaton with failure transitions.
const FLAG_FAILURE: u8 = 1;

/// Any automaton a container can hold.
#[derive(Clone, Debug)]
pub enum AnyAutomaton {
    Dfa(SuccinctDfa),
    DfaFailure(SuccinctDfaFailure),
    AcyclicDfa(SuccinctAcyclicDfa),
    Nfa(SuccinctNfa),
    Diagram(DyckBoxedDiagram),
}

impl AnyAutomaton {
    pub fn state_count(&self) -> u32 {
        match self {
            AnyAutomaton::Dfa(s) => s.state_count(),
            AnyAutomaton::DfaFailure(s) => s.state_count(),
            AnyAutomaton::AcyclicDfa(s) => s.state_count(),
            AnyAutomaton::Nfa(s) => s.state_count(),
            AnyAutomaton::Diagram(d) => d.state_count(),
        }
    }

    pub fn alphabet_size(&self) -> u32 {
        match self {
            AnyAutomaton::Dfa(s) => s.alphabet_size(),
            AnyAutomaton::DfaFailure(s) => s.alphabet_size(),
            AnyAutomaton::AcyclicDfa(s) => s.alphabet_size(),
            AnyAutomaton::Nfa(s) => s.alphabet_size(),
            AnyAutomaton::Diagram(d) => d.alphabet_size(),
        }
    }

    /// Runs the membership query.  A stored diagram is decoded to a table
    /// first, so queries on it trade time for the smaller stored form.
    pub fn accept(&self, x: &[Letter]) -> Result<bool> {
        match self {
            AnyAutomaton::Dfa(s) => s.accept(x),
            AnyAutomaton::DfaFailure(s) => s.accept(x),
            AnyAutomaton::AcyclicDfa(s) => s.accept(x),
            AnyAutomaton::Nfa(s) => s.accept(x),
            AnyAutomaton::Diagram(d) => decode_dyck(d)?.accept(x),
        }
    }

    pub fn repr_name(&self) -> &'static str {
        match self {
            AnyAutomaton::Dfa(_) | AnyAutomaton::DfaFailure(_) => "sdfa",
            AnyAutomaton::AcyclicDfa(_) => "sadfa",
            AnyAutomaton::Nfa(_) => "snfa",
            AnyAutomaton::Diagram(_) => "dyck",
        }
    }
}

/// A compressed automaton plus the letter map of its source text.
#[derive(Clone, Debug)]
pub struct Container {
    automaton: AnyAutomaton,
    letters: LetterMap,
}

impl Container {
    pub fn new(automaton: AnyAutomaton, letters: LetterMap) -> Result<Self> {
        if letters.sigma() != automaton.alphabet_size() {
            return Err(Error::AlphabetMismatch {
                left: automaton.alphabet_size(),
                right: letters.sigma(),
            });
        }
        Ok(Container { automaton, letters })
    }

    pub fn automaton(&self) -> &AnyAutomaton {
        &self.automaton
    }

    pub fn into_automaton(self) -> AnyAutomaton {
        self.automaton
    }

    pub fn letters(&self) -> &LetterMap {
        &self.letters
    }

    /// Serializes to the canonical byte layout: fixed section order, no
    /// padding, so equal contents give equal bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let (tag, sections) = self.sections();
        let mut out = Vec::new();
        out.extend_from_slice(OUTER_MAGIC);
        put_u16(&mut out, CONTAINER_VERSION);
        out.push(tag);
        put_u32(&mut out, sections.len() as u32);
        let mut offset = 0u64;
        for (kind, body) in &sections {
            out.push(*kind);
            put_u64(&mut out, offset);
            put_u64(&mut out, body.len() as u64);
            offset += body.len() as u64;
        }
        for (_, body) in &sections {
            out.extend_from_slice(body);
        }
        out
    }

    fn sections(&self) -> (u8, Vec<(u8, Vec<u8>)>) {
        match &self.automaton {
            AnyAutomaton::Dfa(s) => {
                let meta = meta_body(
                    b"SDFA",
                    s.state_count(),
                    s.alphabet_size(),
                    s.initial_label(),
                    0,
                    &self.letters,
                );
                (
                    TAG_SDFA,
                    vec![
                        (SEC_META, meta),
                        (SEC_FINALS, plain_body(s.finals_bits())),
                        (SEC_TREE, plain_body(s.tree_ref().parens())),
                        (SEC_TREE_DIR, tree_dir_body(s.tree_ref())),
                        (SEC_FLAGS, sparse_body(s.flags_ref().sparse())),
                        (SEC_TARGETS, packed_body(s.targets_ref())),
                    ],
                )
            }
            AnyAutomaton::DfaFailure(s) => {
                let meta = meta_body(
                    b"SDFA",
                    s.state_count(),
                    s.alphabet_size(),
                    s.initial_label(),
                    FLAG_FAILURE,
                    &self.letters,
                );
                (
                    TAG_SDFA,
                    vec![
                        (SEC_META, meta),
                        (SEC_FINALS, plain_body(s.finals_bits())),
                        (SEC_TREE, plain_body(s.tree_ref().parens())),
                        (SEC_TREE_DIR, tree_dir_body(s.tree_ref())),
                        (SEC_FLAGS, sparse_body(s.flags_ref().sparse())),
                        (SEC_MASK, sparse_body(s.targets_ref().present_mask())),
                        (SEC_TARGETS, packed_body(s.targets_ref().stored_vec())),
                    ],
                )
            }
            AnyAutomaton::AcyclicDfa(s) => {
                let meta = meta_body(
                    b"SADF",
                    s.state_count(),
                    s.alphabet_size(),
                    s.start_label(),
                    0,
                    &self.letters,
                );
                (
                    TAG_SADFA,
                    vec![
                        (SEC_META, meta),
                        (SEC_TREE, plain_body(s.tree_ref().parens())),
                        (SEC_TREE_DIR, tree_dir_body(s.tree_ref())),
                        (SEC_TABLE, packed_body(s.table_ref())),
                        (SEC_FINALS, plain_body(s.finals_bits())),
                    ],
                )
            }
            AnyAutomaton::Nfa(s) => {
                let meta = meta_body(
                    b"SNFA",
                    s.state_count(),
                    s.alphabet_size(),
                    s.initial_state(),
                    0,
                    &self.letters,
                );
                let mut matrix = Vec::new();
                put_words(&mut matrix, s.rows_words());
                (
                    TAG_SNFA,
                    vec![
                        (SEC_META, meta),
                        (SEC_MATRIX, matrix),
                        (SEC_FINALS, plain_body(s.finals_bits())),
                    ],
                )
            }
            AnyAutomaton::Diagram(d) => {
                let meta = meta_body(
                    b"DYCK",
                    d.state_count(),
                    d.alphabet_size(),
                    d.initial_label(),
                    0,
                    &self.letters,
                );
                (
                    TAG_DYCK,
                    vec![
                        (SEC_META, meta),
                        (SEC_MAX, monotone_body(d.max_seq())),
                        (SEC_BOXED, packed_body(d.boxed_vec())),
                        (SEC_FINALS, plain_body(d.finals_bits())),
                    ],
                )
            }
        }
    }

    /// Parses and fully revalidates a container.  Any malformed byte,
    /// out-of-bounds table entry, or section that fails its structure's own
    /// invariants is an integrity error.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.magic(OUTER_MAGIC)?;
        let version = r.u16()?;
        if version != CONTAINER_VERSION {
            return Err(Error::Integrity(format!(
                "unsupported container version {version}"
            )));
        }
        let tag = r.u8()?;
        let count = r.u32()?;
        let mut table: Vec<(u8, u64, u64)> = Vec::new();
        for _ in 0..count {
            let kind = r.u8()?;
            let offset = r.u64()?;
            let length = r.u64()?;
            table.push((kind, offset, length));
        }
        let payload = r.rest();

        // The table must describe disjoint in-bounds slices, one per kind.
        let mut spans: Vec<(u64, u64)> = Vec::new();
        for &(kind, offset, length) in &table {
            let end = offset
                .checked_add(length)
                .ok_or_else(|| Error::Integrity("section span overflows".into()))?;
            if end > payload.len() as u64 {
                return Err(Error::Integrity(format!(
                    "section kind {kind} ends at {end}, past payload size {}",
                    payload.len()
                )));
            }
            spans.push((offset, end));
            if table.iter().filter(|e| e.0 == kind).count() > 1 {
                return Err(Error::Integrity(format!("duplicate section kind {kind}")));
            }
        }
        spans.sort_unstable();
        for pair in spans.windows(2) {
            if pair[1].0 < pair[0].1 {
                return Err(Error::Integrity("overlapping sections".into()));
            }
        }
        let section = |kind: u8| -> Result<Reader> {
            let &(_, offset, length) = table
                .iter()
                .find(|e| e.0 == kind)
                .ok_or_else(|| Error::Integrity(format!("missing section kind {kind}")))?;
            Ok(Reader::new(&payload[offset as usize..(offset + length) as usize]))
        };
        let expect_kinds = |kinds: &[u8]| -> Result<()> {
            for &(kind, _, _) in &table {
                if !kinds.contains(&kind) {
                    return Err(Error::Integrity(format!("unexpected section kind {kind}")));
                }
            }
            Ok(())
        };

        let automaton = match tag {
            TAG_SDFA => {
                let mut mr = section(SEC_META)?;
                let meta = read_meta(&mut mr, b"SDFA")?;
                if meta.flags & !FLAG_FAILURE != 0 {
                    return Err(Error::Integrity(format!("unknown flags {:#x}", meta.flags)));
                }
                let failure = meta.flags & FLAG_FAILURE != 0;
                let mut kinds = vec![SEC_META, SEC_FINALS, SEC_TREE, SEC_TREE_DIR, SEC_FLAGS, SEC_TARGETS];
                if failure {
                    kinds.push(SEC_MASK);
                }
                expect_kinds(&kinds)?;
                let finals = read_plain(&mut section(SEC_FINALS)?)?;
                let tree = read_tree(&mut section(SEC_TREE)?, &mut section(SEC_TREE_DIR)?)?;
                let flags = TreeFlags::from_sparse(read_sparse(&mut section(SEC_FLAGS)?)?);
                if failure {
                    let mask = read_sparse(&mut section(SEC_MASK)?)?;
                    let stored = read_packed(&mut section(SEC_TARGETS)?)?;
                    let targets = FailureCompressedBoxed::from_parts(mask, stored)?;
                    AnyAutomaton::DfaFailure(SuccinctDfaFailure::from_parts(
                        meta.n, meta.sigma, meta.initial, finals, tree, flags, targets,
                    )?)
                } else {
                    let targets = read_packed(&mut section(SEC_TARGETS)?)?;
                    AnyAutomaton::Dfa(SuccinctDfa::from_parts(
                        meta.n, meta.sigma, meta.initial, finals, tree, flags, targets,
                    )?)
                }
            }
            TAG_SADFA => {
                let mut mr = section(SEC_META)?;
                let meta = read_meta(&mut mr, b"SADF")?;
                if meta.flags != 0 {
                    return Err(Error::Integrity(format!("unknown flags {:#x}", meta.flags)));
                }
                expect_kinds(&[SEC_META, SEC_TREE, SEC_TREE_DIR, SEC_TABLE, SEC_FINALS])?;
                let tree = read_tree(&mut section(SEC_TREE)?, &mut section(SEC_TREE_DIR)?)?;
                let table_sec = read_packed(&mut section(SEC_TABLE)?)?;
                let finals = read_plain(&mut section(SEC_FINALS)?)?;
                AnyAutomaton::AcyclicDfa(SuccinctAcyclicDfa::from_parts(
                    meta.n, meta.sigma, meta.initial, tree, table_sec, finals,
                )?)
            }
            TAG_SNFA => {
                let mut mr = section(SEC_META)?;
                let meta = read_meta(&mut mr, b"SNFA")?;
                if meta.flags != 0 {
                    return Err(Error::Integrity(format!("unknown flags {:#x}", meta.flags)));
                }
                expect_kinds(&[SEC_META, SEC_MATRIX, SEC_FINALS])?;
                let bits = meta.sigma as u128 * meta.n as u128 * meta.n as u128;
                if bits > 1 << 48 {
                    return Err(Error::Integrity("transition matrix too large".into()));
                }
                let mut xr = section(SEC_MATRIX)?;
                let rows = xr.words((bits as u64).div_ceil(64))?;
                xr.done()?;
                let finals = read_plain(&mut section(SEC_FINALS)?)?;
                AnyAutomaton::Nfa(SuccinctNfa::from_parts(
                    meta.n, meta.sigma, meta.initial, rows, finals,
                )?)
            }
            TAG_DYCK => {
                let mut mr = section(SEC_META)?;
                let meta = read_meta(&mut mr, b"DYCK")?;
                if meta.flags != 0 {
                    return Err(Error::Integrity(format!("unknown flags {:#x}", meta.flags)));
                }
                expect_kinds(&[SEC_META, SEC_MAX, SEC_BOXED, SEC_FINALS])?;
                let max = read_monotone(&mut section(SEC_MAX)?)?;
                let boxed = read_packed(&mut section(SEC_BOXED)?)?;
                let finals = read_plain(&mut section(SEC_FINALS)?)?;
                let diag = DyckBoxedDiagram::from_parts(meta.n, meta.sigma, max, boxed, finals)?;
                if meta.initial != diag.initial_label() {
                    return Err(Error::Integrity("diagram initial label".into()));
                }
                AnyAutomaton::Diagram(diag)
            }
            other => {
                return Err(Error::Integrity(format!(
                    "unknown representation tag {other}"
                )));
            }
        };
        if automaton.state_count() != {
            let mut mr = section(SEC_META)?;
            skip_magic_version(&mut mr)?;
            mr.u32()?
        } {
            return Err(Error::Integrity("state count drifted".into()));
        }
        let letters = {
            let mut mr = section(SEC_META)?;
            skip_magic_version(&mut mr)?;
            let _n = mr.u32()?;
            let sigma = mr.u32()?;
            let _initial = mr.u32()?;
            let _flags = mr.u8()?;
            let letters = read_letters(&mut mr, sigma)?;
            mr.done()?;
            letters
        };
        Container::new(automaton, letters)
    }
}

struct Meta {
    n: u32,
    sigma: u32,
    initial: u32,
    flags: u8,
}

fn skip_magic_version(r: &mut Reader) -> Result<()> {
    r.take(4)?;
    r.u16()?;
    Ok(())
}

fn read_meta(r: &mut Reader, magic: &[u8; 4]) -> Result<Meta> {
    r.magic(magic)?;
    let version = r.u16()?;
    if version != META_VERSION {
        return Err(Error::Integrity(format!("unsupported header version {version}")));
    }
    let n = r.u32()?;
    let sigma = r.u32()?;
    let initial = r.u32()?;
    let flags = r.u8()?;
    if n == 0 || sigma == 0 || n > 1 << 31 || sigma > 1 << 31 {
        return Err(Error::Integrity(format!("implausible shape n={n} sigma={sigma}")));
    }
    Ok(Meta {
        n,
        sigma,
        initial,
        flags,
    })
}

fn read_letters(r: &mut Reader, sigma: u32) -> Result<LetterMap> {
    let count = r.u32()?;
    if count == 0 {
        return Ok(LetterMap::numeric(sigma));
    }
    if count != sigma {
        return Err(Error::Integrity(format!(
            "letter map has {count} tokens for alphabet size {sigma}"
        )));
    }
    let mut tokens = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let len = r.u32()? as usize;
        let bytes = r.take(len)?;
        tokens.push(String::from_utf8(bytes.to_vec()).map_err(|_| {
            Error::Integrity("letter token is not valid text".into())
        })?);
    }
    LetterMap::symbolic(tokens).map_err(|e| Error::Integrity(format!("letter map: {e}")))
}

fn meta_body(
    magic: &[u8; 4],
    n: u32,
    sigma: u32,
    initial: u32,
    flags: u8,
    letters: &LetterMap,
) -> Vec<u8> {
    let mut body = Vec::new();
    body.extend_from_slice(magic);
    put_u16(&mut body, META_VERSION);
    put_u32(&mut body, n);
    put_u32(&mut body, sigma);
    put_u32(&mut body, initial);
    body.push(flags);
    match letters.tokens() {
        None => put_u32(&mut body, 0),
        Some(tokens) => {
            put_u32(&mut body, tokens.len() as u32);
            for t in tokens {
                put_u32(&mut body, t.len() as u32);
                body.extend_from_slice(t.as_bytes());
            }
        }
    }
    body
}

fn bits_header(body: &mut Vec<u8>, kind: u8, length: u64, ones: u64) {
    body.extend_from_slice(BITS_MAGIC);
    put_u16(body, BITS_VERSION);
    body.push(kind);
    put_u64(body, length);
    put_u64(body, ones);
}

fn read_bits_header(r: &mut Reader, want_kind: u8) -> Result<(u64, u64)> {
    r.magic(BITS_MAGIC)?;
    let version = r.u16()?;
    if version != BITS_VERSION {
        return Err(Error::Integrity(format!("unsupported bit section version {version}")));
    }
    let kind = r.u8()?;
    if kind != want_kind {
        return Err(Error::Integrity(format!(
            "bit section kind {kind}, expected {want_kind}"
        )));
    }
    Ok((r.u64()?, r.u64()?))
}

fn plain_body(bv: &Bitvector) -> Vec<u8> {
    let mut body = Vec::new();
    bits_header(&mut body, BITS_PLAIN, bv.len(), bv.count_ones());
    put_words(&mut body, bv.words());
    body
}

fn read_plain(r: &mut Reader) -> Result<Bitvector> {
    let (length, ones) = read_bits_header(r, BITS_PLAIN)?;
    let words = r.words(length.div_ceil(64))?;
    r.done()?;
    let bv = Bitvector::from_words(words, length);
    if bv.count_ones() != ones {
        return Err(Error::Integrity(format!(
            "bitvector has {} ones, header says {ones}",
            bv.count_ones()
        )));
    }
    Ok(bv)
}

/// Monotone payload: the high bitvector's words, then the packed low words.
/// Both sizes are fixed by (length, count), so no inner framing is needed.
fn monotone_payload(body: &mut Vec<u8>, ms: &MonotoneSequence) {
    put_words(body, ms.high().words());
    put_words(body, ms.low_words());
}

fn monotone_body(ms: &MonotoneSequence) -> Vec<u8> {
    let mut body = Vec::new();
    bits_header(&mut body, BITS_MONOTONE, ms.universe(), ms.len());
    monotone_payload(&mut body, ms);
    body
}

fn read_monotone_payload(r: &mut Reader, universe: u64, count: u64) -> Result<MonotoneSequence> {
    if count == 0 {
        return MonotoneSequence::from_parts(0, universe, Bitvector::empty(), Vec::new());
    }
    let low_width = MonotoneSequence::width_for(count, universe);
    let high_bits = count + (universe >> low_width) + 1;
    let high = Bitvector::from_words(r.words(high_bits.div_ceil(64))?, high_bits);
    let low = r.words((count * low_width as u64).div_ceil(64))?;
    MonotoneSequence::from_parts(count, universe, high, low)
}

fn read_monotone(r: &mut Reader) -> Result<MonotoneSequence> {
    let (universe, count) = read_bits_header(r, BITS_MONOTONE)?;
    let ms = read_monotone_payload(r, universe, count)?;
    r.done()?;
    Ok(ms)
}

fn sparse_body(sb: &SparseBitvector) -> Vec<u8> {
    let mut body = Vec::new();
    bits_header(&mut body, BITS_SPARSE, sb.len(), sb.count_ones());
    monotone_payload(&mut body, sb.positions());
    body
}

fn read_sparse(r: &mut Reader) -> Result<SparseBitvector> {
    let (length, ones) = read_bits_header(r, BITS_SPARSE)?;
    let positions = read_monotone_payload(r, length, ones)?;
    r.done()?;
    SparseBitvector::from_parts(length, positions)
}

fn packed_body(pv: &PackedVector) -> Vec<u8> {
    let mut body = Vec::new();
    body.extend_from_slice(PACKED_MAGIC);
    put_u64(&mut body, pv.len());
    put_u64(&mut body, pv.base());
    put_u32(&mut body, pv.per_block());
    put_words(&mut body, pv.raw_words());
    body
}

fn read_packed(r: &mut Reader) -> Result<PackedVector> {
    r.magic(PACKED_MAGIC)?;
    let len = r.u64()?;
    let base = r.u64()?;
    let per_block = r.u32()?;
    if len > 1 << 48 {
        return Err(Error::Integrity("packed vector too large".into()));
    }
    let words = r.words(PackedVector::words_needed(len, base)?)?;
    r.done()?;
    let pv = PackedVector::from_raw(len, base, words)?;
    if pv.per_block() != per_block {
        return Err(Error::Integrity(format!(
            "packed vector declares {per_block} values per block, base {base} implies {}",
            pv.per_block()
        )));
    }
    Ok(pv)
}

fn tree_dir_body(tree: &BpTree) -> Vec<u8> {
    let mut body = Vec::new();
    let heap = tree.heap();
    put_u64(&mut body, heap.len() as u64);
    for node in heap {
        put_u32(&mut body, node.total as u32);
        put_u32(&mut body, node.min as u32);
        put_u32(&mut body, node.max as u32);
        put_u32(&mut body, node.min_count);
    }
    body
}

fn read_tree(parens_r: &mut Reader, dir_r: &mut Reader) -> Result<BpTree> {
    let parens = read_plain(parens_r)?;
    let count = dir_r.u64()?;
    // 16 bytes per node; check against the section size before allocating.
    if count.checked_mul(16) != Some(dir_r.remaining() as u64) {
        return Err(Error::Integrity("paren directory length".into()));
    }
    let mut heap = Vec::with_capacity(count as usize);
    for _ in 0..count {
        heap.push(ExcessNode {
            total: dir_r.u32()? as i32,
            min: dir_r.u32()? as i32,
            max: dir_r.u32()? as i32,
            min_count: dir_r.u32()?,
        });
    }
    dir_r.done()?;
    BpTree::from_parts(parens, &heap)
}

fn put_u16(buf: &mut Vec<u8>, v: u16) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(buf: &mut Vec<u8>, v: u64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_words(buf: &mut Vec<u8>, words: &[u64]) {
    for &w in words {
        put_u64(buf, w);
    }
}

/// Bounds-checked little-endian cursor; every overrun is an integrity error.
struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Integrity("container truncated".into()));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("size checked")))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("size checked")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("size checked")))
    }

    fn words(&mut self, count: u64) -> Result<Vec<u64>> {
        let bytes = count
            .checked_mul(8)
            .and_then(|b| usize::try_from(b).ok())
            .ok_or_else(|| Error::Integrity("word count overflows".into()))?;
        let raw = self.take(bytes)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().expect("chunk is 8 bytes")))
            .collect())
    }

    fn magic(&mut self, want: &[u8; 4]) -> Result<()> {
        let got = self.take(4)?;
        if got != want {
            return Err(Error::Integrity(format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(got),
                String::from_utf8_lossy(want)
            )));
        }
        Ok(())
    }

    fn rest(&self) -> &'a [u8] {
        &self.buf[self.pos..]
    }

    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    fn done(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::Integrity(format!(
                "{} trailing bytes in section",
                self.buf.len() - self.pos
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{
        random_acyclic_dfa, random_connected_dfa, random_connected_nfa, ExplicitDfa,
    };
    use crate::dyckcodec::encode_dyck;
    use crate::sadfa::SuccinctAcyclicDfa;
    use crate::snfa::SuccinctNfa;

    fn sample_dfa_container() -> Container {
        let d = random_connected_dfa(40, 3, 0.3, 11);
        let s = SuccinctDfa::build(&d).unwrap();
        let map = LetterMap::numeric(3);
        Container::new(AnyAutomaton::Dfa(s), map).unwrap()
    }

    #[test]
    fn deterministic_bytes_and_round_trip() {
        let c = sample_dfa_container();
        let bytes = c.to_bytes();
        assert_eq!(bytes, c.to_bytes());
        let back = Container::from_bytes(&bytes).unwrap();
        assert_eq!(back.to_bytes(), bytes);
        let (AnyAutomaton::Dfa(orig), AnyAutomaton::Dfa(reread)) =
            (c.automaton(), back.automaton())
        else {
            panic!("representation changed");
        };
        assert_eq!(orig.state_count(), reread.state_count());
        for q in 1..=orig.state_count() {
            for l in 1..=orig.alphabet_size() {
                assert_eq!(orig.delta(q, l).unwrap(), reread.delta(q, l).unwrap());
            }
        }
    }

    #[test]
    fn double_complement_is_byte_identical() {
        let d = random_connected_dfa(25, 2, 0.5, 3);
        let s = SuccinctDfa::build(&d).unwrap();
        let map = LetterMap::numeric(2);
        let once = Container::new(AnyAutomaton::Dfa(s.complement()), map.clone()).unwrap();
        let twice =
            Container::new(AnyAutomaton::Dfa(s.complement().complement()), map.clone()).unwrap();
        let plain = Container::new(AnyAutomaton::Dfa(s), map).unwrap();
        assert_eq!(twice.to_bytes(), plain.to_bytes());
        assert_ne!(once.to_bytes(), plain.to_bytes());
    }

    #[test]
    fn failure_variant_round_trip() {
        // Redirect some non-tree transitions into an absorbing non-final
        // state; tree edges stay, so every live state remains reachable.
        let base = random_connected_dfa(12, 2, 0.4, 21);
        let n = base.state_count();
        let dfs = crate::automaton::lex_dfs(&base);
        let sink = n + 1;
        let mut delta = Vec::new();
        for q in 1..=n {
            for c in 1..=2u32 {
                let slot = (dfs.relabel[q as usize] as usize - 1) * 2 + c as usize - 1;
                let redirect = !dfs.tree_edge[slot] && (q + c) % 3 == 0;
                delta.push(if redirect { sink } else { base.delta(q, c) });
            }
        }
        delta.extend([sink, sink]);
        let mut finals: Vec<bool> = (1..=n).map(|q| base.is_final(q)).collect();
        finals.push(false);
        let d = ExplicitDfa::new(sink, 2, base.initial(), finals, delta).unwrap();
        let s = SuccinctDfaFailure::build(&d, sink).unwrap();
        let c = Container::new(AnyAutomaton::DfaFailure(s), LetterMap::numeric(2)).unwrap();
        let bytes = c.to_bytes();
        let back = Container::from_bytes(&bytes).unwrap();
        assert_eq!(back.to_bytes(), bytes);
        let (AnyAutomaton::DfaFailure(orig), AnyAutomaton::DfaFailure(reread)) =
            (c.automaton(), back.automaton())
        else {
            panic!("representation changed");
        };
        for q in 1..=orig.state_count() {
            for l in 1..=2 {
                assert_eq!(orig.delta(q, l).unwrap(), reread.delta(q, l).unwrap());
            }
        }
    }

    #[test]
    fn acyclic_round_trip() {
        let d = random_acyclic_dfa(30, 3, 0.3, 5);
        let s = SuccinctAcyclicDfa::build(&d).unwrap();
        let c = Container::new(AnyAutomaton::AcyclicDfa(s), LetterMap::numeric(3)).unwrap();
        let bytes = c.to_bytes();
        let back = Container::from_bytes(&bytes).unwrap();
        assert_eq!(back.to_bytes(), bytes);
        let (AnyAutomaton::AcyclicDfa(orig), AnyAutomaton::AcyclicDfa(reread)) =
            (c.automaton(), back.automaton())
        else {
            panic!("representation changed");
        };
        for q in 0..orig.state_count() {
            for l in 1..=3 {
                assert_eq!(orig.delta(q, l).unwrap(), reread.delta(q, l).unwrap());
            }
        }
    }

    #[test]
    fn nfa_round_trip() {
        let m = random_connected_nfa(9, 2, 0.3, 0.4, 17);
        let s = SuccinctNfa::build(&m).unwrap();
        let c = Container::new(AnyAutomaton::Nfa(s), LetterMap::numeric(2)).unwrap();
        let bytes = c.to_bytes();
        let back = Container::from_bytes(&bytes).unwrap();
        assert_eq!(back.to_bytes(), bytes);
        for x in [vec![], vec![1], vec![2, 1], vec![1, 1, 2, 2, 1]] {
            assert_eq!(
                c.automaton().accept(&x).unwrap(),
                back.automaton().accept(&x).unwrap()
            );
        }
    }

    #[test]
    fn diagram_round_trip() {
        let d = random_connected_dfa(15, 3, 0.4, 29);
        let diag = encode_dyck(&d).unwrap();
        let c = Container::new(AnyAutomaton::Diagram(diag), LetterMap::numeric(3)).unwrap();
        let bytes = c.to_bytes();
        let back = Container::from_bytes(&bytes).unwrap();
        assert_eq!(back.to_bytes(), bytes);
        let (AnyAutomaton::Diagram(orig), AnyAutomaton::Diagram(reread)) =
            (c.automaton(), back.automaton())
        else {
            panic!("representation changed");
        };
        assert_eq!(orig.max_array(), reread.max_array());
        assert_eq!(orig.boxed_array(), reread.boxed_array());
    }

    #[test]
    fn symbolic_letters_survive() {
        let d = random_connected_dfa(8, 2, 0.5, 31);
        let s = SuccinctDfa::build(&d).unwrap();
        let map = LetterMap::symbolic(vec!["0".into(), "1".into()]).unwrap();
        let c = Container::new(AnyAutomaton::Dfa(s), map).unwrap();
        let back = Container::from_bytes(&c.to_bytes()).unwrap();
        assert_eq!(back.letters().tokens(), Some(&["0".to_string(), "1".to_string()][..]));
        assert_eq!(back.letters().resolve("1").unwrap(), 2);
    }

    #[test]
    fn truncation_and_tampering_are_integrity_errors() {
        let c = sample_dfa_container();
        let bytes = c.to_bytes();
        assert!(matches!(
            Container::from_bytes(&bytes[..bytes.len() - 1]),
            Err(Error::Integrity(_))
        ));
        assert!(matches!(
            Container::from_bytes(&bytes[..10]),
            Err(Error::Integrity(_))
        ));
        let mut wrong_magic = bytes.clone();
        wrong_magic[0] = b'X';
        assert!(matches!(
            Container::from_bytes(&wrong_magic),
            Err(Error::Integrity(_))
        ));
        let mut wrong_tag = bytes.clone();
        wrong_tag[6] = 9;
        assert!(matches!(
            Container::from_bytes(&wrong_tag),
            Err(Error::Integrity(_))
        ));
        // A single flipped byte must never crash the parser or yield an
        // inconsistent structure: it either fails some check or lands on a
        // free-choice payload byte (a target label, a final bit) and loads
        // as a different but fully valid automaton.
        let mut survived = 0;
        for i in 11..bytes.len() {
            let mut tam = bytes.clone();
            tam[i] ^= 0x40;
            if let Ok(back) = Container::from_bytes(&tam) {
                survived += 1;
                assert_eq!(back.automaton().alphabet_size(), 3);
                back.automaton().accept(&[1, 2, 3]).unwrap();
            }
        }
        assert!(survived * 4 < bytes.len(), "{survived} of {}", bytes.len());
    }

    #[test]
    fn section_overlap_is_rejected() {
        let c = sample_dfa_container();
        let bytes = c.to_bytes();
        // Rewrite the second table entry's offset to 0 so it overlaps the
        // first section.  The table starts after magic+version+tag+count.
        let entry = 4 + 2 + 1 + 4 + 17;
        let mut tam = bytes.clone();
        tam[entry + 1..entry + 9].copy_from_slice(&0u64.to_le_bytes());
        let err = Container::from_bytes(&tam).unwrap_err();
        assert!(matches!(err, Error::Integrity(_)));
    }
}
