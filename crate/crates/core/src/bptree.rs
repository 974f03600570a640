//! Ordered trees as balanced-parentheses strings.
//!
//! A tree on `n` nodes is a string of `2n` parentheses (bit 1 = open, bit
//! 0 = close) written by a depth-first walk.  Nodes are identified by
//! preorder number, 1-based; navigation reduces to excess searches over the
//! string: the excess at prefix position `j` is `rank1(j) - rank0(j)`.
//!
//! Searches are answered by a complete binary tree of block summaries.  Each
//! 512-bit block stores the total excess change plus the minimum, maximum,
//! and minimum-occurrence count of the in-block prefix excess; a search scans
//! at most two blocks bytewise (with 256-entry lookup tables) and otherwise
//! moves through summary nodes, so every operation is `O(log n)`.

use crate::bits::Bitvector;
use crate::{Error, Result};

/// Bits per summary leaf.
const BP_BLOCK_BITS: u64 = 512;

/// Per-byte excess statistics, indexed by byte value, bits LSB-first.
///
/// For prefix sums `P_s` (contribution of the first `s` bits, `s` in 1..=8)
/// and suffix sums `S_s` (last `s` bits): `total` is `P_8`, `pre_min`/
/// `pre_max`/`pre_min_cnt` describe the `P_s`, and `suf_min`/`suf_max`
/// describe the `S_s`.
struct ByteTables {
    total: [i8; 256],
    pre_min: [i8; 256],
    pre_max: [i8; 256],
    pre_min_cnt: [u8; 256],
    suf_min: [i8; 256],
    suf_max: [i8; 256],
}

const BT: ByteTables = build_byte_tables();

const fn build_byte_tables() -> ByteTables {
    let mut t = ByteTables {
        total: [0; 256],
        pre_min: [0; 256],
        pre_max: [0; 256],
        pre_min_cnt: [0; 256],
        suf_min: [0; 256],
        suf_max: [0; 256],
    };
    let mut b = 0usize;
    while b < 256 {
        let mut sum = 0i8;
        let mut pmin = i8::MAX;
        let mut pmax = i8::MIN;
        let mut pcnt = 0u8;
        let mut s = 0;
        while s < 8 {
            sum += if (b >> s) & 1 == 1 { 1 } else { -1 };
            if sum < pmin {
                pmin = sum;
                pcnt = 1;
            } else if sum == pmin {
                pcnt += 1;
            }
            if sum > pmax {
                pmax = sum;
            }
            s += 1;
        }
        t.total[b] = sum;
        t.pre_min[b] = pmin;
        t.pre_max[b] = pmax;
        t.pre_min_cnt[b] = pcnt;

        let mut ssum = 0i8;
        let mut smin = i8::MAX;
        let mut smax = i8::MIN;
        let mut s = 0;
        while s < 8 {
            ssum += if (b >> (7 - s)) & 1 == 1 { 1 } else { -1 };
            if ssum < smin {
                smin = ssum;
            }
            if ssum > smax {
                smax = ssum;
            }
            s += 1;
        }
        t.suf_min[b] = smin;
        t.suf_max[b] = smax;
        b += 1;
    }
    t
}

/// Summary of one segment of the paren string: excess change over the
/// segment, and min/max/min-count of the prefix excess inside it, relative
/// to the excess at the segment start.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct ExcessNode {
    pub total: i32,
    pub min: i32,
    pub max: i32,
    pub min_count: u32,
}

/// Sentinel for padding leaves: never matched, absorbed by combine.
const PAD: ExcessNode = ExcessNode {
    total: 0,
    min: i32::MAX / 2,
    max: i32::MIN / 2,
    min_count: 0,
};

fn combine(l: ExcessNode, r: ExcessNode) -> ExcessNode {
    let rmin = l.total.saturating_add(r.min);
    let rmax = l.total.saturating_add(r.max);
    let min = l.min.min(rmin);
    let min_count = match (l.min == min, rmin == min) {
        (true, true) => l.min_count + r.min_count,
        (true, false) => l.min_count,
        (false, true) => r.min_count,
        (false, false) => 0,
    };
    ExcessNode {
        total: l.total + r.total,
        min,
        max: l.max.max(rmax),
        min_count,
    }
}

/// A static ordered tree addressed by preorder number.
#[derive(Clone, Debug)]
pub struct BpTree {
    parens: Bitvector,
    n: u64,
    /// Leaf slots in the summary heap (power of two).
    leaves: usize,
    /// 1-based heap; `heap[leaves + b]` summarizes block `b`.
    heap: Vec<ExcessNode>,
}

impl BpTree {
    /// Builds from a paren string, bit 1 = open.  The string must describe
    /// a single non-empty tree: excess positive everywhere inside and zero
    /// exactly at the end.
    pub fn build(parens: Bitvector) -> Result<Self> {
        let len = parens.len();
        if len == 0 || len % 2 != 0 {
            return Err(Error::Validation(format!(
                "paren string of length {len} cannot describe a tree"
            )));
        }
        let tree = Self::assemble(parens);
        let root = tree.heap[1];
        if root.total != 0 || root.min != 0 || root.min_count != 1 {
            return Err(Error::Validation(
                "unbalanced paren string: not a single properly nested tree".into(),
            ));
        }
        Ok(tree)
    }

    pub fn from_bools(parens: &[bool]) -> Result<Self> {
        Self::build(Bitvector::from_bools(parens))
    }

    fn assemble(parens: Bitvector) -> BpTree {
        let len = parens.len();
        let blocks = len.div_ceil(BP_BLOCK_BITS).max(1) as usize;
        let leaves = blocks.next_power_of_two();
        let mut heap = vec![PAD; 2 * leaves];
        for b in 0..blocks {
            heap[leaves + b] = Self::block_stats(&parens, b as u64);
        }
        for i in (1..leaves).rev() {
            heap[i] = combine(heap[2 * i], heap[2 * i + 1]);
        }
        BpTree {
            n: len / 2,
            parens,
            leaves,
            heap,
        }
    }

    /// Folds byte statistics over one block.
    fn block_stats(parens: &Bitvector, b: u64) -> ExcessNode {
        let lo = b * BP_BLOCK_BITS;
        let hi = ((b + 1) * BP_BLOCK_BITS).min(parens.len());
        let words = parens.words();
        let mut acc: Option<ExcessNode> = None;
        let mut i = lo;
        while i < hi {
            let piece = if i % 8 == 0 && i + 8 <= hi {
                let byte = (words[(i / 64) as usize] >> (i % 64)) & 0xFF;
                let node = ExcessNode {
                    total: BT.total[byte as usize] as i32,
                    min: BT.pre_min[byte as usize] as i32,
                    max: BT.pre_max[byte as usize] as i32,
                    min_count: BT.pre_min_cnt[byte as usize] as u32,
                };
                i += 8;
                node
            } else {
                let d = if parens.get0(i) { 1 } else { -1 };
                i += 1;
                ExcessNode {
                    total: d,
                    min: d,
                    max: d,
                    min_count: 1,
                }
            };
            acc = Some(match acc {
                None => piece,
                Some(a) => combine(a, piece),
            });
        }
        acc.unwrap_or(PAD)
    }

    pub fn node_count(&self) -> u64 {
        self.n
    }

    pub fn parens(&self) -> &Bitvector {
        &self.parens
    }

    /// Paren bits plus summary directory, as serialized.
    pub fn payload_bits(&self) -> u64 {
        self.parens.payload_bits()
    }

    pub fn directory_bits(&self) -> u64 {
        self.parens.directory_bits() + (self.heap.len() as u64) * 128
    }

    pub(crate) fn heap(&self) -> &[ExcessNode] {
        &self.heap
    }

    pub(crate) fn from_parts(parens: Bitvector, heap: &[ExcessNode]) -> Result<Self> {
        let tree = Self::build(parens)?;
        if tree.heap != heap {
            return Err(Error::Integrity(
                "paren summary directory does not match paren string".into(),
            ));
        }
        Ok(tree)
    }

    fn check_node(&self, v: u64) -> Result<()> {
        if v == 0 || v > self.n {
            return Err(Error::OutOfRange {
                what: "tree node",
                index: v,
                limit: self.n,
            });
        }
        Ok(())
    }

    /// Excess at prefix position `j` (after `j` bits), via the rank
    /// directory.
    #[inline]
    fn excess(&self, j: u64) -> i64 {
        2 * self.parens.rank1_prefix(j) as i64 - j as i64
    }

    /// 0-based bit index of node `v`'s open paren.
    #[inline]
    fn open_bit(&self, v: u64) -> u64 {
        self.parens
            .select1(v)
            .expect("node number within open-paren count")
            - 1
    }

    /// Parent of `v`, or `None` for the root.
    pub fn parent(&self, v: u64) -> Result<Option<u64>> {
        self.check_node(v)?;
        if v == 1 {
            return Ok(None);
        }
        let p0 = self.open_bit(v);
        let e = self.excess(p0);
        let j = self
            .bwd_search(p0 + 1, e - 1)
            .expect("non-root node has an enclosing open paren");
        Ok(Some(self.parens.rank1_prefix(j + 1)))
    }

    /// Number of children of `v`.
    pub fn degree(&self, v: u64) -> Result<u64> {
        self.check_node(v)?;
        let p0 = self.open_bit(v);
        let c0 = self.find_close(p0);
        if c0 == p0 + 1 {
            return Ok(0);
        }
        let e = self.excess(p0);
        Ok(self.count_excess(p0 + 2, c0, e + 1))
    }

    /// The `i`-th child of `v` (1-based), if it exists.
    pub fn child(&self, v: u64, i: u64) -> Result<u64> {
        self.check_node(v)?;
        let p0 = self.open_bit(v);
        let c0 = self.find_close(p0);
        let fail = |deg: u64| Error::OutOfRange {
            what: "child index",
            index: i,
            limit: deg,
        };
        if c0 == p0 + 1 || i == 0 {
            return Err(fail(0));
        }
        let open = if i == 1 {
            p0 + 1
        } else {
            let e = self.excess(p0);
            // The (i-1)-th return to the child-boundary excess is the close
            // of child i-1; the next bit opens child i.
            match self.select_excess(p0 + 2, c0, e + 1, i - 1) {
                Some(j) if j < c0 => j,
                _ => return Err(fail(self.count_excess(p0 + 2, c0, e + 1))),
            }
        };
        debug_assert!(self.parens.get0(open));
        Ok(self.parens.rank1_prefix(open + 1))
    }

    /// Number of nodes in the subtree rooted at `v`.
    pub fn subtree_size(&self, v: u64) -> Result<u64> {
        self.check_node(v)?;
        let p0 = self.open_bit(v);
        let c0 = self.find_close(p0);
        Ok((c0 - p0 + 1) / 2)
    }

    pub fn is_leaf(&self, v: u64) -> Result<bool> {
        self.check_node(v)?;
        let p0 = self.open_bit(v);
        Ok(!self.parens.get0(p0 + 1))
    }

    /// Bit index of the close paren matching the open paren at bit `p0`.
    fn find_close(&self, p0: u64) -> u64 {
        debug_assert!(self.parens.get0(p0));
        // The close restores the excess seen just before the open.
        self.fwd_search(p0 + 1, self.excess(p0))
            .expect("balanced string closes every open")
    }

    /// Smallest bit index `i >= from` with excess(i+1) == target.
    fn fwd_search(&self, from: u64, target: i64) -> Option<u64> {
        let len = self.parens.len();
        if from >= len {
            return None;
        }
        let mut ex = self.excess(from);
        let b0 = from / BP_BLOCK_BITS;
        let hi = ((b0 + 1) * BP_BLOCK_BITS).min(len);
        if let Some(i) = self.scan_fwd(from, hi, &mut ex, target) {
            return Some(i);
        }
        // Climb: whenever standing in a left child, the right sibling covers
        // the bits immediately after the range seen so far.
        let mut node = self.leaves + b0 as usize;
        while node > 1 {
            if node % 2 == 0 {
                let sib = self.heap[node + 1];
                let d = target - ex;
                if (sib.min as i64) <= d && d <= sib.max as i64 {
                    return Some(self.descend_fwd(node + 1, ex, target));
                }
                ex += sib.total as i64;
            }
            node /= 2;
        }
        None
    }

    fn descend_fwd(&self, mut node: usize, mut ex: i64, target: i64) -> u64 {
        while node < self.leaves {
            let l = self.heap[2 * node];
            let d = target - ex;
            if (l.min as i64) <= d && d <= l.max as i64 {
                node = 2 * node;
            } else {
                ex += l.total as i64;
                node = 2 * node + 1;
            }
        }
        let b = (node - self.leaves) as u64;
        let lo = b * BP_BLOCK_BITS;
        let hi = ((b + 1) * BP_BLOCK_BITS).min(self.parens.len());
        self.scan_fwd(lo, hi, &mut ex, target)
            .expect("summary promised a hit in this block")
    }

    /// Bytewise forward scan of bits [lo, hi); advances `ex` past scanned
    /// bits when no hit.
    fn scan_fwd(&self, lo: u64, hi: u64, ex: &mut i64, target: i64) -> Option<u64> {
        let words = self.parens.words();
        let mut i = lo;
        while i < hi && (i % 8 != 0 || i + 8 > hi) {
            *ex += if self.parens.get0(i) { 1 } else { -1 };
            if *ex == target {
                return Some(i);
            }
            i += 1;
        }
        while i + 8 <= hi {
            let byte = ((words[(i / 64) as usize] >> (i % 64)) & 0xFF) as usize;
            let d = target - *ex;
            if (BT.pre_min[byte] as i64) <= d && d <= BT.pre_max[byte] as i64 {
                loop {
                    *ex += if self.parens.get0(i) { 1 } else { -1 };
                    if *ex == target {
                        return Some(i);
                    }
                    i += 1;
                }
            }
            *ex += BT.total[byte] as i64;
            i += 8;
        }
        while i < hi {
            *ex += if self.parens.get0(i) { 1 } else { -1 };
            if *ex == target {
                return Some(i);
            }
            i += 1;
        }
        None
    }

    /// Largest prefix position `j < from` with excess(j) == target.
    fn bwd_search(&self, from: u64, target: i64) -> Option<u64> {
        if from == 0 {
            return None;
        }
        let mut ex = self.excess(from);
        let b0 = (from - 1) / BP_BLOCK_BITS;
        let lo = b0 * BP_BLOCK_BITS;
        if let Some(j) = self.scan_bwd(from, lo, &mut ex, target) {
            return Some(j);
        }
        // Climb: whenever standing in a right child, the left sibling covers
        // the bits immediately before the range seen so far.
        let mut node = self.leaves + b0 as usize;
        while node > 1 {
            if node % 2 == 1 {
                let sib = self.heap[node - 1];
                if Self::reachable_bwd(sib, ex, target) {
                    return Some(self.descend_bwd(node - 1, ex, target));
                }
                ex -= sib.total as i64;
            }
            node /= 2;
        }
        None
    }

    /// Whether a backward pass through a segment ending at excess `ex` can
    /// hit `target`.  The segment's walk covers its start (relative 0) and
    /// every interior prefix; the segment-end position was already examined
    /// by the caller, so including relative `total` adds no false hits.
    #[inline]
    fn reachable_bwd(seg: ExcessNode, ex: i64, target: i64) -> bool {
        let start = ex - seg.total as i64;
        let d = target - start;
        (seg.min as i64).min(0) <= d && d <= (seg.max as i64).max(0)
    }

    fn descend_bwd(&self, mut node: usize, mut ex: i64, target: i64) -> u64 {
        while node < self.leaves {
            let r = self.heap[2 * node + 1];
            if Self::reachable_bwd(r, ex, target) {
                node = 2 * node + 1;
            } else {
                ex -= r.total as i64;
                node = 2 * node;
            }
        }
        let b = (node - self.leaves) as u64;
        let lo = b * BP_BLOCK_BITS;
        let hi = ((b + 1) * BP_BLOCK_BITS).min(self.parens.len());
        self.scan_bwd(hi, lo, &mut ex, target)
            .expect("summary promised a hit in this block")
    }

    /// Bytewise backward scan over prefix positions from-1 down to lo;
    /// rewinds `ex` past scanned bits when no hit.
    fn scan_bwd(&self, from: u64, lo: u64, ex: &mut i64, target: i64) -> Option<u64> {
        let words = self.parens.words();
        let mut i = from;
        while i > lo && (i % 8 != 0 || i < lo + 8) {
            i -= 1;
            *ex -= if self.parens.get0(i) { 1 } else { -1 };
            if *ex == target {
                return Some(i);
            }
        }
        while i >= lo + 8 {
            let byte = ((words[((i - 8) / 64) as usize] >> ((i - 8) % 64)) & 0xFF) as usize;
            if *ex - BT.suf_max[byte] as i64 <= target && target <= *ex - BT.suf_min[byte] as i64 {
                loop {
                    i -= 1;
                    *ex -= if self.parens.get0(i) { 1 } else { -1 };
                    if *ex == target {
                        return Some(i);
                    }
                }
            }
            *ex -= BT.total[byte] as i64;
            i -= 8;
        }
        while i > lo {
            i -= 1;
            *ex -= if self.parens.get0(i) { 1 } else { -1 };
            if *ex == target {
                return Some(i);
            }
        }
        None
    }

    /// Number of prefix positions `j` in `[jlo, jhi]` with excess(j) ==
    /// target, where `target` is the minimum excess over that range.
    fn count_excess(&self, jlo: u64, jhi: u64, target: i64) -> u64 {
        debug_assert!(jlo >= 1);
        let mut count = 0;
        self.walk_min_range(jlo, jhi, target, &mut |c, _| {
            count += c;
            true
        });
        count
    }

    /// Prefix position of the `k`-th occurrence counted by
    /// [`count_excess`], if there are at least `k`.
    fn select_excess(&self, jlo: u64, jhi: u64, target: i64, k: u64) -> Option<u64> {
        debug_assert!(k >= 1);
        let mut seen = 0;
        let mut found = None;
        self.walk_min_range(jlo, jhi, target, &mut |c, locate| {
            if seen + c >= k {
                found = Some(locate(k - seen));
                false
            } else {
                seen += c;
                true
            }
        });
        found
    }

    /// Decomposes the prefix-position range `[jlo, jhi]` into boundary block
    /// scans and whole summary nodes, left to right.  For each piece, calls
    /// `visit(count, locate)` where `count` is the number of target-excess
    /// positions in the piece and `locate(k)` resolves the piece's `k`-th
    /// one; `visit` returns false to stop.
    fn walk_min_range(
        &self,
        jlo: u64,
        jhi: u64,
        target: i64,
        visit: &mut dyn FnMut(u64, &mut dyn FnMut(u64) -> u64) -> bool,
    ) {
        // Prefix position j is produced by bit j-1.
        let bit_lo = jlo - 1;
        let bit_hi = jhi;
        let bl = bit_lo / BP_BLOCK_BITS;
        let bh = (bit_hi - 1) / BP_BLOCK_BITS;
        let mut ex = self.excess(bit_lo);

        if bl == bh {
            self.visit_scan(bit_lo, bit_hi, &mut ex, target, visit);
            return;
        }
        let head_hi = (bl + 1) * BP_BLOCK_BITS;
        if !self.visit_scan(bit_lo, head_hi, &mut ex, target, visit) {
            return;
        }

        // Whole blocks (bl+1 .. bh-1) via the summary heap, standard
        // two-sided segment decomposition collected so the left run comes in
        // order and the right run is reversed.
        let mut left_run = Vec::new();
        let mut right_run = Vec::new();
        let mut l = self.leaves + (bl + 1) as usize;
        let mut r = self.leaves + bh as usize;
        while l < r {
            if l % 2 == 1 {
                left_run.push(l);
                l += 1;
            }
            if r % 2 == 1 {
                r -= 1;
                right_run.push(r);
            }
            l /= 2;
            r /= 2;
        }
        for &node in left_run.iter().chain(right_run.iter().rev()) {
            let seg = self.heap[node];
            let c = if ex + (seg.min as i64) == target {
                seg.min_count as u64
            } else {
                0
            };
            let keep = visit(c, &mut |k| self.descend_select(node, ex, target, k));
            if !keep {
                return;
            }
            ex += seg.total as i64;
        }

        let tail_lo = bh * BP_BLOCK_BITS;
        self.visit_scan(tail_lo, bit_hi, &mut ex, target, visit);
    }

    /// Counts target hits in bits [lo, hi) by scanning, reporting them to
    /// `visit` as one piece.
    fn visit_scan(
        &self,
        lo: u64,
        hi: u64,
        ex: &mut i64,
        target: i64,
        visit: &mut dyn FnMut(u64, &mut dyn FnMut(u64) -> u64) -> bool,
    ) -> bool {
        if lo >= hi {
            return true;
        }
        let mut count = 0;
        let mut cur = *ex;
        for i in lo..hi {
            cur += if self.parens.get0(i) { 1 } else { -1 };
            if cur == target {
                count += 1;
            }
        }
        let start_ex = *ex;
        *ex = cur;
        visit(count, &mut |k| {
            let mut c = start_ex;
            let mut left = k;
            for i in lo..hi {
                c += if self.parens.get0(i) { 1 } else { -1 };
                if c == target {
                    left -= 1;
                    if left == 0 {
                        return i + 1;
                    }
                }
            }
            unreachable!("piece reported {k} hits it cannot locate")
        })
    }

    /// Finds the `k`-th target-excess position inside a summary node whose
    /// minimum equals the target.
    fn descend_select(&self, mut node: usize, mut ex: i64, target: i64, mut k: u64) -> u64 {
        while node < self.leaves {
            let l = self.heap[2 * node];
            let c = if ex + (l.min as i64) == target {
                l.min_count as u64
            } else {
                0
            };
            if k <= c {
                node = 2 * node;
            } else {
                k -= c;
                ex += l.total as i64;
                node = 2 * node + 1;
            }
        }
        let b = (node - self.leaves) as u64;
        let lo = b * BP_BLOCK_BITS;
        let hi = ((b + 1) * BP_BLOCK_BITS).min(self.parens.len());
        let mut left = k;
        for i in lo..hi {
            ex += if self.parens.get0(i) { 1 } else { -1 };
            if ex == target {
                left -= 1;
                if left == 0 {
                    return i + 1;
                }
            }
        }
        unreachable!("summary node promised {k} hits")
    }
}
