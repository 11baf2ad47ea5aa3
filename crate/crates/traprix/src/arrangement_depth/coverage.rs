//! Maximum-depth sweep over axis-parallel rectangles with independently
//! open or closed sides.
//!
//! The x-axis is discretized into the sorted distinct boundary keys
//! x_1 < ... < x_m and the interleaved open gaps, giving the leaf intervals
//! [x_1,x_1], (x_1,x_2), [x_2,x_2], ..., [x_m,x_m] of a balanced coverage
//! tree. A horizontal line sweeps from above; each rectangle contributes an
//! opening and a closing event, and same-y events are processed in four
//! groups so that shared boundaries count exactly:
//!
//!   1. closing events of rectangles with an open bottom
//!   2. opening events of rectangles with a closed top
//!   3. closing events of rectangles with a closed bottom
//!   4. opening events of rectangles with an open top
//!
//! Internal nodes carry additive counters (l, r) and their running maxima
//! (l_m, r_m) toward each child; leaves carry the coverage c and its maximum
//! c_m. Each event touches only the two root-to-leaf paths bounding its
//! covered interval.

use super::OpenRect;
use crate::geometry::Point;

#[derive(Debug, Clone)]
struct CtNode {
    lo: u32,
    hi: u32,
    left: usize,
    right: usize,
    // Internal: pending add and pending-max toward each child.
    l: i64,
    r: i64,
    l_m: i64,
    r_m: i64,
    // Leaf: coverage now and best so far.
    c: i64,
    c_m: i64,
}

const NO_CHILD: usize = usize::MAX;

impl CtNode {
    fn is_leaf(&self) -> bool {
        self.left == NO_CHILD
    }
}

pub(super) struct CoverageTree {
    nodes: Vec<CtNode>,
    root: usize,
    leaf_positions: u32,
}

impl CoverageTree {
    /// Tree over `leaf_positions` consecutive positions (2m - 1 for m keys).
    pub(super) fn new(leaf_positions: u32) -> Self {
        assert!(leaf_positions > 0);
        let mut tree = CoverageTree {
            nodes: Vec::with_capacity(2 * leaf_positions as usize),
            root: 0,
            leaf_positions,
        };
        tree.root = tree.build(0, leaf_positions - 1);
        tree
    }

    fn build(&mut self, lo: u32, hi: u32) -> usize {
        let idx = self.nodes.len();
        self.nodes.push(CtNode {
            lo,
            hi,
            left: NO_CHILD,
            right: NO_CHILD,
            l: 0,
            r: 0,
            l_m: 0,
            r_m: 0,
            c: 0,
            c_m: 0,
        });
        if lo < hi {
            let mid = lo + (hi - lo) / 2;
            let left = self.build(lo, mid);
            let right = self.build(mid + 1, hi);
            self.nodes[idx].left = left;
            self.nodes[idx].right = right;
        }
        idx
    }

    /// Moves one side's pending counters of `v` into the child, clearing
    /// them from `v`. The child's own history happened first, then the
    /// parent's, which fixes how the running maxima compose.
    fn push_side(&mut self, v: usize, left_side: bool) {
        let (pend, pend_m, child) = if left_side {
            let n = &mut self.nodes[v];
            let out = (n.l, n.l_m, n.left);
            n.l = 0;
            n.l_m = 0;
            out
        } else {
            let n = &mut self.nodes[v];
            let out = (n.r, n.r_m, n.right);
            n.r = 0;
            n.r_m = 0;
            out
        };
        let ch = &mut self.nodes[child];
        if ch.is_leaf() {
            ch.c_m = ch.c_m.max(ch.c + pend_m);
            ch.c += pend;
        } else {
            ch.l_m = ch.l_m.max(ch.l + pend_m);
            ch.l += pend;
            ch.r_m = ch.r_m.max(ch.r + pend_m);
            ch.r += pend;
        }
    }

    /// Adds `d` over leaf positions `a..=b`, updating running maxima.
    pub(super) fn apply(&mut self, a: u32, b: u32, d: i64) {
        debug_assert!(a <= b && b < self.leaf_positions);
        self.apply_rec(self.root, a, b, d);
    }

    fn apply_rec(&mut self, v: usize, a: u32, b: u32, d: i64) {
        if self.nodes[v].is_leaf() {
            let n = &mut self.nodes[v];
            n.c += d;
            n.c_m = n.c_m.max(n.c);
            return;
        }
        for left_side in [true, false] {
            let child = if left_side {
                self.nodes[v].left
            } else {
                self.nodes[v].right
            };
            let (clo, chi) = (self.nodes[child].lo, self.nodes[child].hi);
            if b < clo || a > chi {
                continue;
            }
            if a <= clo && chi <= b {
                // Fully covered: record in the pending counters only.
                let n = &mut self.nodes[v];
                if left_side {
                    n.l += d;
                    n.l_m = n.l_m.max(n.l);
                } else {
                    n.r += d;
                    n.r_m = n.r_m.max(n.r);
                }
            } else {
                self.push_side(v, left_side);
                self.apply_rec(child, a, b, d);
            }
        }
    }

    /// Final root-to-leaf propagation; afterwards every pending counter is
    /// zero and each leaf's c_m is its true historical maximum.
    pub(super) fn propagate_all(&mut self) {
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            if self.nodes[v].is_leaf() {
                continue;
            }
            self.push_side(v, true);
            self.push_side(v, false);
            stack.push(self.nodes[v].left);
            stack.push(self.nodes[v].right);
        }
    }

    pub(super) fn max_leaf_coverage(&self) -> i64 {
        self.max_leaf_coverage_filtered(|_| true)
    }

    /// Maximum historical coverage over the leaves a predicate admits;
    /// call after `propagate_all`.
    pub(super) fn max_leaf_coverage_filtered(&self, admissible: impl Fn(u32) -> bool) -> i64 {
        self.nodes
            .iter()
            .filter(|n| n.is_leaf() && admissible(n.lo))
            .map(|n| n.c_m)
            .max()
            .unwrap_or(0)
    }

    /// Path accumulation t(leaf): sum of pendings from root to the leaf.
    /// Used by the sweep-invariant audits.
    #[cfg(test)]
    fn path_sums(&self, pos: u32) -> (i64, i64, usize) {
        let mut v = self.root;
        let mut t = 0i64;
        let mut t_m = 0i64;
        loop {
            let n = &self.nodes[v];
            if n.is_leaf() {
                return (t, t_m, v);
            }
            if pos <= self.nodes[n.left].hi {
                t_m = n.l_m.max(n.l + t_m);
                t += n.l;
                v = n.left;
            } else {
                t_m = n.r_m.max(n.r + t_m);
                t += n.r;
                v = n.right;
            }
        }
    }

    /// Current coverage of a leaf interval per sweep invariant 1.
    #[cfg(test)]
    pub(super) fn current_coverage(&self, pos: u32) -> i64 {
        let (t, _, leaf) = self.path_sums(pos);
        self.nodes[leaf].c + t
    }

    /// Maximum coverage seen so far per sweep invariant 2.
    #[cfg(test)]
    pub(super) fn max_coverage_so_far(&self, pos: u32) -> i64 {
        let (_, t_m, leaf) = self.path_sums(pos);
        self.nodes[leaf].c_m.max(self.nodes[leaf].c + t_m)
    }
}

/// One sweep event: a rectangle starts (+1) or stops (-1) covering its
/// x-interval of leaf positions.
#[derive(Debug, Clone)]
pub(super) struct SweepEvent {
    pub y: i64,
    pub group: u8,
    pub first_leaf: u32,
    pub last_leaf: u32,
    pub delta: i64,
}

/// Canonical same-y processing order (group index 0..3).
pub(super) const CANONICAL_GROUPS: [u8; 4] = [0, 1, 2, 3];

pub(super) fn sweep_max_depth(rects: &[OpenRect], group_rank: &[u8; 4]) -> u32 {
    sweep_engine(rects, group_rank, false)
}

/// Variant for rectangles reduced from trapezoid logs: leaf intervals that
/// lie inside a covertical wall column (consecutive boundary keys sharing
/// an x) are left out of the final maximum. Such columns have a bounded
/// y-extent in the plane, which one rectangle per trapezoid cannot express;
/// the caller evaluates them directly instead.
pub(super) fn sweep_max_depth_skipping_covertical(rects: &[OpenRect]) -> u32 {
    sweep_engine(rects, &CANONICAL_GROUPS, true)
}

/// Maps each rectangle onto leaf positions and builds its two events.
/// `group_rank[g]` gives the processing rank of event group `g`, injectable
/// so tests can demonstrate that violating the order breaks shared-boundary
/// instances.
fn sweep_engine(rects: &[OpenRect], group_rank: &[u8; 4], skip_covertical: bool) -> u32 {
    if rects.is_empty() {
        return 0;
    }
    let mut keys: Vec<&Point> = Vec::with_capacity(rects.len() * 2);
    for r in rects {
        keys.push(&r.x_lo);
        keys.push(&r.x_hi);
    }
    keys.sort();
    keys.dedup();
    let m = keys.len() as u32;
    let leaf_positions = 2 * m - 1;

    let key_index = |p: &Point| keys.binary_search(&p).expect("boundary key present") as u32;

    let mut events: Vec<SweepEvent> = Vec::with_capacity(rects.len() * 2);
    for r in rects {
        let i = key_index(&r.x_lo) as i64;
        let j = key_index(&r.x_hi) as i64;
        // Key x_i sits at leaf 2i, the open gap after it at 2i + 1.
        let first = if r.left_closed { 2 * i } else { 2 * i + 1 };
        let last = if r.right_closed { 2 * j } else { 2 * j - 1 };
        if first > last {
            // Covers no leaf interval (degenerate x-range with open sides).
            continue;
        }
        let (first, last) = (first as u32, last as u32);
        debug_assert!(last < leaf_positions);
        let open_group = if r.top_closed { 1 } else { 3 };
        let close_group = if r.bottom_closed { 2 } else { 0 };
        events.push(SweepEvent {
            y: r.y_hi,
            group: group_rank[open_group],
            first_leaf: first,
            last_leaf: last,
            delta: 1,
        });
        events.push(SweepEvent {
            y: r.y_lo,
            group: group_rank[close_group],
            first_leaf: first,
            last_leaf: last,
            delta: -1,
        });
    }

    events.sort_by(|a, b| b.y.cmp(&a.y).then(a.group.cmp(&b.group)));

    let mut tree = CoverageTree::new(leaf_positions);
    for ev in &events {
        tree.apply(ev.first_leaf, ev.last_leaf, ev.delta);
    }
    tree.propagate_all();
    if !skip_covertical {
        return tree.max_leaf_coverage().max(0) as u32;
    }
    let same_x = |i: usize, j: usize| keys[i].x == keys[j].x;
    let admissible = |pos: u32| -> bool {
        let pos = pos as usize;
        if pos % 2 == 1 {
            // Gap between keys i and i + 1.
            let i = pos / 2;
            !same_x(i, i + 1)
        } else {
            // Degenerate [key, key] interval: skip when it belongs to a
            // covertical column (its point covers are dominated by the
            // column cells the caller evaluates directly).
            let i = pos / 2;
            !((i > 0 && same_x(i - 1, i)) || (i + 1 < keys.len() && same_x(i, i + 1)))
        }
    };
    tree.max_leaf_coverage_filtered(admissible).max(0) as u32
}
