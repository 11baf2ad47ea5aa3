//! Longest feasible search path.
//!
//! The DAG's depth over-approximates query cost: merged leaves have several
//! parents, and most of those paths can never be taken by an actual query.
//! This verifier walks only realizable descents by carrying the interval of
//! lexicographic keys still consistent with the x-decisions taken so far.
//! When a point node's key falls outside the interval only the geometrically
//! possible side is entered; when it falls inside, the descent splits, and
//! the branch of queries equal to the key terminates right at that node.
//!
//! The walk uses an explicit stack: on adversarial scenes the DAG depth is
//! linear in the number of segments, which would overflow the call stack.

use crate::dag::{Dag, Node, PointId};

/// Interval endpoint over lexicographic keys.
///
/// Descents only ever tighten with open bounds; the closed case exists for
/// the degenerate single-key interval a query equal to a point node's key
/// would occupy, and such a descent terminates at that node instead of
/// continuing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[allow(dead_code)]
enum Bound {
    Unbounded,
    Open(PointId),
    Closed(PointId),
}

#[derive(Debug, Clone, Copy)]
struct Interval {
    low: Bound,
    high: Bound,
}

impl Interval {
    const FULL: Interval = Interval {
        low: Bound::Unbounded,
        high: Bound::Unbounded,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathStats {
    /// Internal-node count of the longest feasible root-to-end descent.
    pub longest: u32,
    /// Number of distinct feasible root-to-leaf descents; equals the leaf
    /// count of the search tree the DAG mimics.
    pub feasible_paths: u64,
}

/// Computes the longest feasible search path length and the feasible path
/// count. Read-only; safe to run concurrently with queries.
pub fn max_search_path_length(dag: &Dag) -> PathStats {
    let lt = |a: PointId, b: PointId| dag.point(a) < dag.point(b);

    // Tightest upper bound among `high` and an open bound at `p`.
    // Open beats closed at the same key, so "p at or before the bound"
    // always tightens to an open bound at p.
    let cap_high = |high: Bound, p: PointId| match high {
        Bound::Unbounded => Bound::Open(p),
        Bound::Open(b) | Bound::Closed(b) => {
            if p == b || lt(p, b) {
                Bound::Open(p)
            } else {
                high
            }
        }
    };
    let cap_low = |low: Bound, p: PointId| match low {
        Bound::Unbounded => Bound::Open(p),
        Bound::Open(a) | Bound::Closed(a) => {
            if p == a || lt(a, p) {
                Bound::Open(p)
            } else {
                low
            }
        }
    };

    let nonempty = |iv: &Interval| match (iv.low, iv.high) {
        (Bound::Unbounded, _) | (_, Bound::Unbounded) => true,
        (Bound::Open(a) | Bound::Closed(a), Bound::Open(b) | Bound::Closed(b)) if lt(a, b) => true,
        (Bound::Closed(a), Bound::Closed(b)) => a == b,
        _ => false,
    };
    let contains = |iv: &Interval, p: PointId| {
        let above_low = match iv.low {
            Bound::Unbounded => true,
            Bound::Open(a) => lt(a, p),
            Bound::Closed(a) => a == p || lt(a, p),
        };
        let below_high = match iv.high {
            Bound::Unbounded => true,
            Bound::Open(b) => lt(p, b),
            Bound::Closed(b) => p == b || lt(p, b),
        };
        above_low && below_high
    };

    let mut longest = 0u32;
    let mut feasible_paths = 0u64;
    let mut stack: Vec<(u32, Interval, u32)> = vec![(dag.root().0, Interval::FULL, 0)];

    while let Some((node, iv, consumed)) = stack.pop() {
        match dag.node(crate::dag::NodeId(node)) {
            Node::Leaf { .. } => {
                feasible_paths += 1;
                longest = longest.max(consumed);
            }
            Node::Y { seg, above, below, .. } => {
                // An interval whose bounds share an x pins queries to one
                // covertical column, which also fixes their y range; the
                // segment then admits only the side it does not screen off.
                let mut go_above = true;
                let mut go_below = true;
                if let (
                    Bound::Open(a) | Bound::Closed(a),
                    Bound::Open(b) | Bound::Closed(b),
                ) = (iv.low, iv.high)
                {
                    let (pa, pb) = (dag.point(a), dag.point(b));
                    let s = dag.segment(*seg);
                    if pa.x == pb.x && pa.x >= s.left().x && pa.x <= s.right().x {
                        let sy = s.y_at(&pa.x);
                        if sy >= pb.y {
                            go_above = false;
                        }
                        if sy <= pa.y {
                            go_below = false;
                        }
                    }
                }
                if go_above {
                    stack.push((above.0, iv, consumed + 1));
                }
                if go_below {
                    stack.push((below.0, iv, consumed + 1));
                }
            }
            Node::X { point, left, right, .. } => {
                if contains(&iv, *point) {
                    // Queries equal to the key end their search here.
                    longest = longest.max(consumed + 1);
                }
                let left_iv = Interval {
                    low: iv.low,
                    high: cap_high(iv.high, *point),
                };
                if nonempty(&left_iv) {
                    stack.push((left.0, left_iv, consumed + 1));
                }
                let right_iv = Interval {
                    low: cap_low(iv.low, *point),
                    high: iv.high,
                };
                if nonempty(&right_iv) {
                    stack.push((right.0, right_iv, consumed + 1));
                }
            }
        }
    }

    PathStats {
        longest,
        feasible_paths,
    }
}
