//! The trapezoidal map and its history DAG.
//!
//! Segments are inserted incrementally. Each insertion locates the trapezoid
//! containing the new segment's left endpoint, walks right through every
//! intersected trapezoid via the neighbor links, splits them, and merges
//! horizontally adjacent pieces that share both top and bottom. Killed leaf
//! nodes are overwritten in place with the root of their replacement
//! subgraph, which is what turns the history tree into a DAG.
//!
//! Every leaf stores its depth (nodes on the longest root-to-leaf path,
//! leaf included); internal nodes freeze their root distance at creation and
//! never change it afterwards, so the running maximum depth is maintainable
//! in constant time per new node.

use std::collections::HashMap;

use thiserror::Error;

use crate::geometry::{
    cmp_lex, orientation, point_vs_segment, Orientation, Point, Rational, Segment, VerticalSide,
};

/// Index of an interned point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointId(pub u32);

/// Index of an interned segment. Index 0 is the bottom edge of the bounding
/// frame and index 1 its top edge; input segments start at 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SegIdx(pub u32);

impl SegIdx {
    pub const BBOX_BOTTOM: SegIdx = SegIdx(0);
    pub const BBOX_TOP: SegIdx = SegIdx(1);

    pub fn is_frame(&self) -> bool {
        self.0 < 2
    }
}

/// Index of a DAG node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(pub u32);

/// Index of a trapezoid. Trapezoids are never removed from the arena; dead
/// ones keep their final extent, which makes the arena double as the log of
/// every trapezoid ever created.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TrapId(pub u32);

#[derive(Debug, Clone)]
pub enum Node {
    X {
        point: PointId,
        left: NodeId,
        right: NodeId,
        depth: u32,
    },
    Y {
        seg: SegIdx,
        above: NodeId,
        below: NodeId,
        depth: u32,
    },
    Leaf {
        trap: TrapId,
        depth: u32,
    },
}

impl Node {
    pub fn depth(&self) -> u32 {
        match self {
            Node::X { depth, .. } | Node::Y { depth, .. } | Node::Leaf { depth, .. } => *depth,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trapezoid {
    pub top: SegIdx,
    pub bottom: SegIdx,
    pub leftp: PointId,
    pub rightp: PointId,
    pub upper_left: Option<TrapId>,
    pub lower_left: Option<TrapId>,
    pub upper_right: Option<TrapId>,
    pub lower_right: Option<TrapId>,
    pub alive: bool,
    pub node: NodeId,
}

/// One row of the all-trapezoids-ever log: final extent plus bounding
/// curves. Width may be zero (covertical walls).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrapezoidRecord {
    pub left: Point,
    pub right: Point,
    pub top: SegIdx,
    pub bottom: SegIdx,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LocateKind {
    Face(TrapId),
    Edge(SegIdx),
    Vertex(PointId),
}

/// Result of a point-location query. `path_len` counts the internal decision
/// nodes consumed, including the terminal node for edge and vertex answers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocateResult {
    pub kind: LocateKind,
    pub path_len: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InsertStats {
    pub trapezoids_killed: u32,
    pub trapezoids_created: u32,
    pub merges: u32,
    pub new_depth: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DagStats {
    pub n_segments: usize,
    pub node_count: usize,
    pub leaf_count: usize,
    pub depth: u32,
}

/// Axis-parallel bounding frame with rational corners.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundingBox {
    pub x0: Rational,
    pub y0: Rational,
    pub x1: Rational,
    pub y1: Rational,
}

impl BoundingBox {
    pub fn new(
        x0: Rational,
        y0: Rational,
        x1: Rational,
        y1: Rational,
    ) -> Result<Self, MapError> {
        if x0 >= x1 || y0 >= y1 {
            return Err(MapError::DegenerateBox);
        }
        Ok(BoundingBox { x0, y0, x1, y1 })
    }

    pub fn ints(x0: i64, y0: i64, x1: i64, y1: i64) -> Result<Self, MapError> {
        BoundingBox::new(
            crate::geometry::rational(x0, 1),
            crate::geometry::rational(y0, 1),
            crate::geometry::rational(x1, 1),
            crate::geometry::rational(y1, 1),
        )
    }

    /// Strict interior test; the frame boundary is excluded.
    pub fn strictly_contains(&self, p: &Point) -> bool {
        p.x > self.x0 && p.x < self.x1 && p.y > self.y0 && p.y < self.y1
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MapError {
    #[error("bounding box must have positive width and height")]
    DegenerateBox,
    #[error("segment intersects an existing segment (index {0})")]
    IntersectsExisting(usize),
    #[error("point or segment endpoint outside the bounding box interior")]
    OutOfBox,
    #[error("segment already inserted")]
    DuplicateSegment,
}

pub struct Dag {
    points: Vec<Point>,
    point_ids: HashMap<Point, PointId>,
    segs: Vec<Segment>,
    seg_ids: HashMap<Segment, SegIdx>,
    nodes: Vec<Node>,
    traps: Vec<Trapezoid>,
    root: NodeId,
    max_depth: u32,
    leaf_count: usize,
    bbox: BoundingBox,
    seed: u64,
}

impl Dag {
    /// Fresh map over `bbox`: one trapezoid spanning the whole frame, one
    /// leaf node, depth 1. The seed is carried as provenance metadata for
    /// the construction that fills the map.
    pub fn new_map(bbox: BoundingBox, seed: u64) -> Self {
        let bottom = Segment::new(
            Point::new(bbox.x0.clone(), bbox.y0.clone()),
            Point::new(bbox.x1.clone(), bbox.y0.clone()),
        )
        .expect("frame bottom edge is valid");
        let top = Segment::new(
            Point::new(bbox.x0.clone(), bbox.y1.clone()),
            Point::new(bbox.x1.clone(), bbox.y1.clone()),
        )
        .expect("frame top edge is valid");

        let mut dag = Dag {
            points: Vec::new(),
            point_ids: HashMap::new(),
            segs: Vec::new(),
            seg_ids: HashMap::new(),
            nodes: Vec::new(),
            traps: Vec::new(),
            root: NodeId(0),
            max_depth: 1,
            leaf_count: 1,
            bbox,
            seed,
        };
        let bl = dag.intern_point(Point::new(dag.bbox.x0.clone(), dag.bbox.y0.clone()));
        let br = dag.intern_point(Point::new(dag.bbox.x1.clone(), dag.bbox.y0.clone()));
        dag.segs.push(bottom);
        dag.segs.push(top);

        dag.traps.push(Trapezoid {
            top: SegIdx::BBOX_TOP,
            bottom: SegIdx::BBOX_BOTTOM,
            leftp: bl,
            rightp: br,
            upper_left: None,
            lower_left: None,
            upper_right: None,
            lower_right: None,
            alive: true,
            node: NodeId(0),
        });
        dag.nodes.push(Node::Leaf {
            trap: TrapId(0),
            depth: 1,
        });
        dag
    }

    pub fn bbox(&self) -> &BoundingBox {
        &self.bbox
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn point(&self, id: PointId) -> &Point {
        &self.points[id.0 as usize]
    }

    pub fn segment(&self, idx: SegIdx) -> &Segment {
        &self.segs[idx.0 as usize]
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0 as usize]
    }

    pub fn trapezoid(&self, id: TrapId) -> &Trapezoid {
        &self.traps[id.0 as usize]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn trap_count(&self) -> usize {
        self.traps.len()
    }

    /// Number of inserted input segments (frame edges excluded).
    pub fn n_segments(&self) -> usize {
        self.segs.len() - 2
    }

    /// All curves known to the map: frame bottom, frame top, then inputs.
    pub fn curves(&self) -> impl Iterator<Item = (SegIdx, &Segment)> {
        self.segs
            .iter()
            .enumerate()
            .map(|(i, s)| (SegIdx(i as u32), s))
    }

    pub fn live_trapezoids(&self) -> impl Iterator<Item = (TrapId, &Trapezoid)> {
        self.traps
            .iter()
            .enumerate()
            .filter(|(_, t)| t.alive)
            .map(|(i, t)| (TrapId(i as u32), t))
    }

    /// The log of every trapezoid ever created, killed intermediates
    /// included, each at its final extent.
    pub fn trapezoid_log(&self) -> impl Iterator<Item = TrapezoidRecord> + '_ {
        (0..self.traps.len()).map(|i| self.record(TrapId(i as u32)))
    }

    pub fn record(&self, id: TrapId) -> TrapezoidRecord {
        let t = &self.traps[id.0 as usize];
        TrapezoidRecord {
            left: self.points[t.leftp.0 as usize].clone(),
            right: self.points[t.rightp.0 as usize].clone(),
            top: t.top,
            bottom: t.bottom,
        }
    }

    pub fn stats(&self) -> DagStats {
        DagStats {
            n_segments: self.n_segments(),
            node_count: self.nodes.len(),
            leaf_count: self.leaf_count,
            depth: self.max_depth,
        }
    }

    fn intern_point(&mut self, p: Point) -> PointId {
        if let Some(&id) = self.point_ids.get(&p) {
            return id;
        }
        let id = PointId(self.points.len() as u32);
        self.points.push(p.clone());
        self.point_ids.insert(p, id);
        id
    }

    /// Validates a candidate segment against the map's preconditions.
    pub fn validate_segment(&self, s: &Segment) -> Result<(), MapError> {
        if !self.bbox.strictly_contains(s.left()) || !self.bbox.strictly_contains(s.right()) {
            return Err(MapError::OutOfBox);
        }
        if self.seg_ids.contains_key(s) {
            return Err(MapError::DuplicateSegment);
        }
        for (i, existing) in self.segs.iter().enumerate().skip(2) {
            if !crate::geometry::segments_interior_disjoint(s, existing) {
                return Err(MapError::IntersectsExisting(i - 2));
            }
        }
        Ok(())
    }

    /// Inserts a segment, re-tiling the map. The segment must be interior
    /// disjoint from everything already inserted and strictly inside the
    /// frame; both conditions are checked here.
    pub fn insert_segment(&mut self, s: &Segment) -> Result<InsertStats, MapError> {
        self.validate_segment(s)?;
        Ok(self.insert_segment_unchecked(s))
    }

    /// Insertion without the O(n) validation pass; used by the build loop
    /// after the scene has been validated once up front.
    pub(crate) fn insert_segment_unchecked(&mut self, s: &Segment) -> InsertStats {
        let pid = self.intern_point(s.left().clone());
        let qid = self.intern_point(s.right().clone());
        let sid = SegIdx(self.segs.len() as u32);
        self.segs.push(s.clone());
        self.seg_ids.insert(s.clone(), sid);

        let crossed = self.follow_segment(sid);
        let mut stats = InsertStats {
            trapezoids_killed: crossed.len() as u32,
            trapezoids_created: 0,
            merges: 0,
            new_depth: 0,
        };

        if crossed.len() == 1 {
            self.split_single(crossed[0], sid, pid, qid, &mut stats);
        } else {
            self.split_many(&crossed, sid, pid, qid, &mut stats);
        }

        stats.new_depth = self.max_depth;
        stats
    }

    /// Locates the live trapezoid whose closure contains `s.left` and whose
    /// interior `s` enters immediately to the right of it.
    pub fn locate_segment_start(&self, s: &Segment) -> Result<TrapId, MapError> {
        self.validate_segment(s)?;
        Ok(self.descend_for_segment(s))
    }

    fn descend_for_segment(&self, s: &Segment) -> TrapId {
        let p = s.left();
        let mut cur = self.root;
        let trap = loop {
            match &self.nodes[cur.0 as usize] {
                Node::Leaf { trap, .. } => break *trap,
                Node::X { point, left, right, .. } => {
                    // Equal keys descend right: the segment extends to the
                    // right of its own left endpoint's wall.
                    cur = if *p < self.points[point.0 as usize] {
                        *left
                    } else {
                        *right
                    };
                }
                Node::Y { seg, above, below, .. } => {
                    let seg_geom = &self.segs[seg.0 as usize];
                    cur = match point_vs_segment(p, seg_geom)
                        .expect("descent keeps queries inside the curve x-range")
                    {
                        VerticalSide::Above => *above,
                        VerticalSide::Below => *below,
                        VerticalSide::On => {
                            // Shared endpoint: break the tie with the slope
                            // of the incoming segment.
                            match orientation(seg_geom.left(), seg_geom.right(), s.right()) {
                                Orientation::Ccw => *above,
                                _ => *below,
                            }
                        }
                    };
                }
            }
        };
        self.correct_start(trap, s)
    }

    /// Walks right from a descent result until the trapezoid actually has
    /// the segment's left endpoint strictly left of its right wall. Needed
    /// when the left endpoint coincides with an existing wall key.
    fn correct_start(&self, mut t: TrapId, s: &Segment) -> TrapId {
        loop {
            let trap = &self.traps[t.0 as usize];
            if *s.left() < self.points[trap.rightp.0 as usize] {
                return t;
            }
            t = match (trap.upper_right, trap.lower_right) {
                (Some(u), None) => u,
                (None, Some(l)) => l,
                (Some(u), Some(l)) if u == l => u,
                (Some(u), Some(l)) => {
                    // Two distinct right neighbors are separated by the top
                    // curve of the lower one.
                    let sep = self.segs[self.traps[l.0 as usize].top.0 as usize].clone();
                    match point_vs_segment(s.left(), &sep) {
                        Ok(VerticalSide::Above) => u,
                        Ok(VerticalSide::Below) => l,
                        _ => match orientation(sep.left(), sep.right(), s.right()) {
                            Orientation::Ccw => u,
                            _ => l,
                        },
                    }
                }
                (None, None) => unreachable!("segment endpoint beyond the frame"),
            };
        }
    }

    /// All live trapezoids intersected by segment `sid`, left to right.
    fn follow_segment(&self, sid: SegIdx) -> Vec<TrapId> {
        let s = self.segs[sid.0 as usize].clone();
        let first = self.descend_for_segment(&s);
        let mut out = vec![first];
        let mut cur = first;
        loop {
            let trap = &self.traps[cur.0 as usize];
            let rightp = &self.points[trap.rightp.0 as usize];
            if *s.right() <= *rightp {
                break;
            }
            let above = point_vs_segment(rightp, &s)
                .expect("walk keeps the right wall inside the segment x-range");
            cur = match above {
                VerticalSide::Above => trap
                    .lower_right
                    .expect("segment exits through a lower-right neighbor"),
                VerticalSide::Below => trap
                    .upper_right
                    .expect("segment exits through an upper-right neighbor"),
                VerticalSide::On => {
                    unreachable!("interior-disjoint input cannot put a wall key on the segment")
                }
            };
            out.push(cur);
        }
        out
    }

    fn new_trap(
        &mut self,
        top: SegIdx,
        bottom: SegIdx,
        leftp: PointId,
        rightp: PointId,
        stats: &mut InsertStats,
    ) -> TrapId {
        let id = TrapId(self.traps.len() as u32);
        self.traps.push(Trapezoid {
            top,
            bottom,
            leftp,
            rightp,
            upper_left: None,
            lower_left: None,
            upper_right: None,
            lower_right: None,
            alive: true,
            // Placeholder until a leaf node is attached.
            node: NodeId(u32::MAX),
        });
        stats.trapezoids_created += 1;
        id
    }

    fn connect_lower(&mut self, left: Option<TrapId>, right: Option<TrapId>) {
        if let Some(r) = right {
            self.traps[r.0 as usize].lower_left = left;
        }
        if let Some(l) = left {
            self.traps[l.0 as usize].lower_right = right;
        }
    }

    fn connect_upper(&mut self, left: Option<TrapId>, right: Option<TrapId>) {
        if let Some(r) = right {
            self.traps[r.0 as usize].upper_left = left;
        }
        if let Some(l) = left {
            self.traps[l.0 as usize].upper_right = right;
        }
    }

    fn add_node(&mut self, node: Node) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(node);
        id
    }

    /// Creates (or re-parents) the leaf for trapezoid `t` under a parent at
    /// root distance `parent_depth`. Merged trapezoids keep a single leaf
    /// with several parents; their depth is the max over parents plus one.
    fn attach_leaf(&mut self, t: TrapId, parent_depth: u32) -> NodeId {
        let existing = self.traps[t.0 as usize].node;
        if existing != NodeId(u32::MAX) {
            let d = self.nodes[existing.0 as usize].depth().max(parent_depth + 1);
            if let Node::Leaf { depth, .. } = &mut self.nodes[existing.0 as usize] {
                *depth = d;
            } else {
                unreachable!("live trapezoid must point at a leaf");
            }
            self.max_depth = self.max_depth.max(d);
            existing
        } else {
            let id = self.add_node(Node::Leaf {
                trap: t,
                depth: parent_depth + 1,
            });
            self.traps[t.0 as usize].node = id;
            self.leaf_count += 1;
            self.max_depth = self.max_depth.max(parent_depth + 1);
            id
        }
    }

    /// Overwrites the killed trapezoid's leaf slot with the decision
    /// subgraph for this split. The slot keeps its node id, so existing
    /// parents stay valid, and it keeps its root distance.
    #[allow(clippy::too_many_arguments)]
    fn replace_slot(
        &mut self,
        killed: TrapId,
        left: Option<TrapId>,
        right: Option<TrapId>,
        above: TrapId,
        below: TrapId,
        sid: SegIdx,
        pid: PointId,
        qid: PointId,
    ) {
        let slot = self.traps[killed.0 as usize].node;
        let d0 = self.nodes[slot.0 as usize].depth();
        self.traps[killed.0 as usize].alive = false;
        self.leaf_count -= 1;

        // The slot was a leaf and becomes internal; its depth is unchanged.
        match (left, right) {
            (None, None) => {
                let a = self.attach_leaf(above, d0);
                let b = self.attach_leaf(below, d0);
                self.nodes[slot.0 as usize] = Node::Y {
                    seg: sid,
                    above: a,
                    below: b,
                    depth: d0,
                };
            }
            (None, Some(r)) => {
                let y = self.add_node(Node::Y {
                    seg: sid,
                    above: NodeId(u32::MAX),
                    below: NodeId(u32::MAX),
                    depth: d0 + 1,
                });
                let a = self.attach_leaf(above, d0 + 1);
                let b = self.attach_leaf(below, d0 + 1);
                if let Node::Y { above, below, .. } = &mut self.nodes[y.0 as usize] {
                    *above = a;
                    *below = b;
                }
                let rl = self.attach_leaf(r, d0);
                self.nodes[slot.0 as usize] = Node::X {
                    point: qid,
                    left: y,
                    right: rl,
                    depth: d0,
                };
            }
            (Some(l), None) => {
                let y = self.add_node(Node::Y {
                    seg: sid,
                    above: NodeId(u32::MAX),
                    below: NodeId(u32::MAX),
                    depth: d0 + 1,
                });
                let a = self.attach_leaf(above, d0 + 1);
                let b = self.attach_leaf(below, d0 + 1);
                if let Node::Y { above, below, .. } = &mut self.nodes[y.0 as usize] {
                    *above = a;
                    *below = b;
                }
                let ll = self.attach_leaf(l, d0);
                self.nodes[slot.0 as usize] = Node::X {
                    point: pid,
                    left: ll,
                    right: y,
                    depth: d0,
                };
            }
            (Some(l), Some(r)) => {
                let y = self.add_node(Node::Y {
                    seg: sid,
                    above: NodeId(u32::MAX),
                    below: NodeId(u32::MAX),
                    depth: d0 + 2,
                });
                let a = self.attach_leaf(above, d0 + 2);
                let b = self.attach_leaf(below, d0 + 2);
                if let Node::Y { above, below, .. } = &mut self.nodes[y.0 as usize] {
                    *above = a;
                    *below = b;
                }
                let rl = self.attach_leaf(r, d0 + 1);
                let x_q = self.add_node(Node::X {
                    point: qid,
                    left: y,
                    right: rl,
                    depth: d0 + 1,
                });
                let ll = self.attach_leaf(l, d0);
                self.nodes[slot.0 as usize] = Node::X {
                    point: pid,
                    left: ll,
                    right: x_q,
                    depth: d0,
                };
            }
        }
    }

    fn split_single(
        &mut self,
        old_id: TrapId,
        sid: SegIdx,
        pid: PointId,
        qid: PointId,
        stats: &mut InsertStats,
    ) {
        let old = self.traps[old_id.0 as usize].clone();
        let p_new = pid != old.leftp;
        let q_new = qid != old.rightp;

        let below = self.new_trap(sid, old.bottom, pid, qid, stats);
        let above = self.new_trap(old.top, sid, pid, qid, stats);

        let left = if p_new {
            let l = self.new_trap(old.top, old.bottom, old.leftp, pid, stats);
            self.connect_lower(old.lower_left, Some(l));
            self.connect_upper(old.upper_left, Some(l));
            self.connect_lower(Some(l), Some(below));
            self.connect_upper(Some(l), Some(above));
            Some(l)
        } else {
            self.connect_lower(old.lower_left, Some(below));
            self.connect_upper(old.upper_left, Some(above));
            None
        };
        let right = if q_new {
            let r = self.new_trap(old.top, old.bottom, qid, old.rightp, stats);
            self.connect_lower(Some(r), old.lower_right);
            self.connect_upper(Some(r), old.upper_right);
            self.connect_lower(Some(below), Some(r));
            self.connect_upper(Some(above), Some(r));
            Some(r)
        } else {
            self.connect_lower(Some(below), old.lower_right);
            self.connect_upper(Some(above), old.upper_right);
            None
        };

        self.replace_slot(old_id, left, right, above, below, sid, pid, qid);
    }

    fn split_many(
        &mut self,
        crossed: &[TrapId],
        sid: SegIdx,
        pid: PointId,
        qid: PointId,
        stats: &mut InsertStats,
    ) {
        // First trapezoid: may get a left piece.
        let old_id = crossed[0];
        let old = self.traps[old_id.0 as usize].clone();
        let p_new = pid != old.leftp;

        let below = self.new_trap(sid, old.bottom, pid, old.rightp, stats);
        let above = self.new_trap(old.top, sid, pid, old.rightp, stats);

        self.connect_lower(Some(below), old.lower_right);
        self.connect_upper(Some(above), old.upper_right);
        let left = if p_new {
            let l = self.new_trap(old.top, old.bottom, old.leftp, pid, stats);
            self.connect_lower(old.lower_left, Some(l));
            self.connect_upper(old.upper_left, Some(l));
            self.connect_lower(Some(l), Some(below));
            self.connect_upper(Some(l), Some(above));
            Some(l)
        } else {
            self.connect_lower(old.lower_left, Some(below));
            self.connect_upper(old.upper_left, Some(above));
            None
        };
        self.replace_slot(old_id, left, None, above, below, sid, pid, qid);

        let mut prev_old = old_id;
        let mut prev_above = above;
        let mut prev_below = below;

        // Middle trapezoids: two pieces each, merged with the previous
        // pieces whenever the bounding curve is unchanged.
        for &old_id in &crossed[1..crossed.len() - 1] {
            let old = self.traps[old_id.0 as usize].clone();

            let below = if self.traps[prev_below.0 as usize].bottom == old.bottom {
                self.traps[prev_below.0 as usize].rightp = old.rightp;
                stats.merges += 1;
                prev_below
            } else {
                self.new_trap(sid, old.bottom, old.leftp, old.rightp, stats)
            };
            let above = if self.traps[prev_above.0 as usize].top == old.top {
                self.traps[prev_above.0 as usize].rightp = old.rightp;
                stats.merges += 1;
                prev_above
            } else {
                self.new_trap(old.top, sid, old.leftp, old.rightp, stats)
            };

            if below != prev_below {
                self.connect_upper(Some(prev_below), Some(below));
                let ll = if old.lower_left == Some(prev_old) {
                    Some(prev_below)
                } else {
                    old.lower_left
                };
                self.connect_lower(ll, Some(below));
            }
            if above != prev_above {
                self.connect_lower(Some(prev_above), Some(above));
                let ul = if old.upper_left == Some(prev_old) {
                    Some(prev_above)
                } else {
                    old.upper_left
                };
                self.connect_upper(ul, Some(above));
            }
            self.connect_lower(Some(below), old.lower_right);
            self.connect_upper(Some(above), old.upper_right);

            self.replace_slot(old_id, None, None, above, below, sid, pid, qid);

            prev_old = old_id;
            prev_above = above;
            prev_below = below;
        }

        // Last trapezoid: may get a right piece.
        let old_id = crossed[crossed.len() - 1];
        let old = self.traps[old_id.0 as usize].clone();
        let q_new = qid != old.rightp;

        let below = if self.traps[prev_below.0 as usize].bottom == old.bottom {
            self.traps[prev_below.0 as usize].rightp = qid;
            stats.merges += 1;
            prev_below
        } else {
            self.new_trap(sid, old.bottom, old.leftp, qid, stats)
        };
        let above = if self.traps[prev_above.0 as usize].top == old.top {
            self.traps[prev_above.0 as usize].rightp = qid;
            stats.merges += 1;
            prev_above
        } else {
            self.new_trap(old.top, sid, old.leftp, qid, stats)
        };

        let right = if q_new {
            let r = self.new_trap(old.top, old.bottom, qid, old.rightp, stats);
            self.connect_lower(Some(r), old.lower_right);
            self.connect_upper(Some(r), old.upper_right);
            self.connect_lower(Some(below), Some(r));
            self.connect_upper(Some(above), Some(r));
            Some(r)
        } else {
            self.connect_lower(Some(below), old.lower_right);
            self.connect_upper(Some(above), old.upper_right);
            None
        };
        if below != prev_below {
            self.connect_upper(Some(prev_below), Some(below));
            let ll = if old.lower_left == Some(prev_old) {
                Some(prev_below)
            } else {
                old.lower_left
            };
            self.connect_lower(ll, Some(below));
        }
        if above != prev_above {
            self.connect_lower(Some(prev_above), Some(above));
            let ul = if old.upper_left == Some(prev_old) {
                Some(prev_above)
            } else {
                old.upper_left
            };
            self.connect_upper(ul, Some(above));
        }

        self.replace_slot(old_id, None, right, above, below, sid, pid, qid);
    }

    /// Root-to-end descent for a query point strictly inside the frame.
    pub fn locate(&self, p: &Point) -> Result<LocateResult, MapError> {
        if !self.bbox.strictly_contains(p) {
            return Err(MapError::OutOfBox);
        }
        let mut cur = self.root;
        let mut path_len = 0u32;
        loop {
            match &self.nodes[cur.0 as usize] {
                Node::Leaf { trap, .. } => {
                    return Ok(LocateResult {
                        kind: LocateKind::Face(*trap),
                        path_len,
                    });
                }
                Node::X { point, left, right, .. } => {
                    path_len += 1;
                    match cmp_lex(p, &self.points[point.0 as usize]) {
                        std::cmp::Ordering::Less => cur = *left,
                        std::cmp::Ordering::Greater => cur = *right,
                        std::cmp::Ordering::Equal => {
                            return Ok(LocateResult {
                                kind: LocateKind::Vertex(*point),
                                path_len,
                            });
                        }
                    }
                }
                Node::Y { seg, above, below, .. } => {
                    path_len += 1;
                    match point_vs_segment(p, &self.segs[seg.0 as usize])
                        .expect("descent keeps queries inside the curve x-range")
                    {
                        VerticalSide::Above => cur = *above,
                        VerticalSide::Below => cur = *below,
                        VerticalSide::On => {
                            return Ok(LocateResult {
                                kind: LocateKind::Edge(*seg),
                                path_len,
                            });
                        }
                    }
                }
            }
        }
    }

    /// Longest root-to-leaf node count recomputed from scratch; cross-checks
    /// the incrementally maintained depth.
    pub fn recompute_max_depth(&self) -> u32 {
        let n = self.nodes.len();
        let mut indeg = vec![0u32; n];
        for node in &self.nodes {
            match node {
                Node::X { left, right, .. } => {
                    indeg[left.0 as usize] += 1;
                    indeg[right.0 as usize] += 1;
                }
                Node::Y { above, below, .. } => {
                    indeg[above.0 as usize] += 1;
                    indeg[below.0 as usize] += 1;
                }
                Node::Leaf { .. } => {}
            }
        }
        let mut dist = vec![0u32; n];
        dist[self.root.0 as usize] = 1;
        let mut queue: Vec<usize> = indeg
            .iter()
            .enumerate()
            .filter(|&(_, &d)| d == 0)
            .map(|(i, _)| i)
            .collect();
        let mut best = 0;
        while let Some(i) = queue.pop() {
            let d = dist[i];
            best = best.max(d);
            let mut push = |c: NodeId| {
                let ci = c.0 as usize;
                dist[ci] = dist[ci].max(d + 1);
                indeg[ci] -= 1;
                if indeg[ci] == 0 {
                    queue.push(ci);
                }
            };
            match &self.nodes[i] {
                Node::X { left, right, .. } => {
                    push(*left);
                    push(*right);
                }
                Node::Y { above, below, .. } => {
                    push(*above);
                    push(*below);
                }
                Node::Leaf { .. } => {}
            }
        }
        best
    }

    /// Lexicographic open-interior containment test against a log record:
    /// strictly between the wall keys and strictly between the bounding
    /// curves.
    pub fn open_region_contains(&self, rec: &TrapezoidRecord, p: &Point) -> bool {
        if *p <= rec.left || *p >= rec.right {
            return false;
        }
        let top = &self.segs[rec.top.0 as usize];
        let bottom = &self.segs[rec.bottom.0 as usize];
        matches!(point_vs_segment(p, top), Ok(VerticalSide::Below))
            && matches!(point_vs_segment(p, bottom), Ok(VerticalSide::Above))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bbox10() -> BoundingBox {
        BoundingBox::ints(0, 0, 10, 10).unwrap()
    }

    #[test]
    fn new_map_is_single_leaf() {
        let dag = Dag::new_map(bbox10(), 7);
        let st = dag.stats();
        assert_eq!(st.n_segments, 0);
        assert_eq!(st.node_count, 1);
        assert_eq!(st.leaf_count, 1);
        assert_eq!(st.depth, 1);
        assert_eq!(dag.trapezoid_log().count(), 1);
    }

    #[test]
    fn degenerate_box_rejected() {
        assert_eq!(BoundingBox::ints(0, 0, 0, 5), Err(MapError::DegenerateBox));
        assert_eq!(BoundingBox::ints(0, 3, 4, 3), Err(MapError::DegenerateBox));
    }

    #[test]
    fn empty_map_locate() {
        let dag = Dag::new_map(bbox10(), 0);
        let res = dag.locate(&Point::ints(3, 4)).unwrap();
        assert_eq!(res.path_len, 0);
        assert!(matches!(res.kind, LocateKind::Face(TrapId(0))));
        assert_eq!(dag.locate(&Point::ints(0, 4)), Err(MapError::OutOfBox));
        assert_eq!(dag.locate(&Point::ints(-1, 4)), Err(MapError::OutOfBox));
    }

    #[test]
    fn single_segment_shape() {
        let mut dag = Dag::new_map(bbox10(), 0);
        let s = Segment::ints(2, 5, 7, 5).unwrap();
        let stats = dag.insert_segment(&s).unwrap();
        assert_eq!(stats.trapezoids_killed, 1);
        assert_eq!(stats.trapezoids_created, 4);
        assert_eq!(stats.merges, 0);

        let st = dag.stats();
        assert_eq!(st.n_segments, 1);
        assert_eq!(st.node_count, 7);
        assert_eq!(st.leaf_count, 4);
        assert_eq!(st.depth, 4);
        assert_eq!(dag.recompute_max_depth(), 4);

        // Above the segment: two x-nodes plus one y-node.
        let above = dag.locate(&Point::ints(4, 8)).unwrap();
        assert_eq!(above.path_len, 3);
        assert!(matches!(above.kind, LocateKind::Face(_)));

        // Left endpoint is answered at the first x-node.
        let v = dag.locate(&Point::ints(2, 5)).unwrap();
        assert_eq!(v.kind, LocateKind::Vertex(PointId(2)));
        assert_eq!(v.path_len, 1);

        // On the segment interior.
        let e = dag.locate(&Point::ints(5, 5)).unwrap();
        assert!(matches!(e.kind, LocateKind::Edge(SegIdx(2))));
        assert_eq!(e.path_len, 3);
    }

    #[test]
    fn figure_one_scene_merges_once() {
        // cv1, then cv2 starting below cv1, crossing cv1's right wall and
        // ending further right. The two below-cv2 pieces share top and
        // bottom and must merge, leaving seven live trapezoids.
        let mut dag = Dag::new_map(bbox10(), 0);
        dag.insert_segment(&Segment::ints(2, 6, 6, 6).unwrap()).unwrap();
        let stats = dag
            .insert_segment(&Segment::ints(3, 4, 8, 4).unwrap())
            .unwrap();
        assert_eq!(stats.merges, 1);
        assert_eq!(stats.trapezoids_killed, 2);
        assert_eq!(dag.stats().leaf_count, 7);
        assert_eq!(dag.live_trapezoids().count(), 7);
        assert_eq!(dag.stats().depth, dag.recompute_max_depth());
    }

    #[test]
    fn disjoint_x_ranges_no_merge() {
        let mut dag = Dag::new_map(bbox10(), 0);
        dag.insert_segment(&Segment::ints(1, 5, 4, 5).unwrap()).unwrap();
        let stats = dag
            .insert_segment(&Segment::ints(5, 3, 8, 3).unwrap())
            .unwrap();
        assert_eq!(stats.merges, 0);
        assert_eq!(dag.stats().leaf_count, 7);
    }

    #[test]
    fn insert_rejects_bad_input() {
        let mut dag = Dag::new_map(bbox10(), 0);
        let s = Segment::ints(2, 5, 7, 5).unwrap();
        dag.insert_segment(&s).unwrap();
        assert_eq!(dag.insert_segment(&s), Err(MapError::DuplicateSegment));
        assert_eq!(
            dag.insert_segment(&Segment::ints(-1, 3, 4, 3).unwrap()),
            Err(MapError::OutOfBox)
        );
        assert_eq!(
            dag.insert_segment(&Segment::ints(3, 2, 5, 8).unwrap()),
            Err(MapError::IntersectsExisting(0))
        );
    }

    #[test]
    fn segment_start_with_shared_left_endpoint() {
        let mut dag = Dag::new_map(bbox10(), 0);
        dag.insert_segment(&Segment::ints(2, 5, 7, 5).unwrap()).unwrap();

        // Shares the left endpoint and heads above the existing segment.
        let up = Segment::ints(2, 5, 6, 8).unwrap();
        let t_up = dag.locate_segment_start(&up).unwrap();
        let above = dag.locate(&Point::ints(4, 8)).unwrap();
        assert_eq!(LocateKind::Face(t_up), above.kind);

        // Same endpoint, heading below.
        let down = Segment::ints(2, 5, 6, 2).unwrap();
        let t_down = dag.locate_segment_start(&down).unwrap();
        let below = dag.locate(&Point::ints(4, 2)).unwrap();
        assert_eq!(LocateKind::Face(t_down), below.kind);

        // Plain case: starting strictly inside the upper trapezoid.
        let mid = Segment::ints(3, 8, 6, 9).unwrap();
        let t_mid = dag.locate_segment_start(&mid).unwrap();
        assert_eq!(LocateKind::Face(t_mid), above.kind);
    }

    #[test]
    fn chained_segments_share_endpoint() {
        let mut dag = Dag::new_map(bbox10(), 0);
        dag.insert_segment(&Segment::ints(1, 5, 4, 5).unwrap()).unwrap();
        dag.insert_segment(&Segment::ints(4, 5, 8, 6).unwrap()).unwrap();
        assert_eq!(dag.stats().depth, dag.recompute_max_depth());
        // Both faces adjacent to the chain vertex resolve.
        assert!(dag.locate(&Point::ints(3, 6)).is_ok());
        assert!(dag.locate(&Point::ints(6, 4)).is_ok());
        let v = dag.locate(&Point::ints(4, 5)).unwrap();
        assert!(matches!(v.kind, LocateKind::Vertex(_)));
    }

    #[test]
    fn dag_is_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        // Construction is single-threaded; a finished map may serve
        // concurrent queries.
        assert_send_sync::<Dag>();
    }

    #[test]
    fn covertical_endpoints_make_zero_width_trapezoid() {
        let mut dag = Dag::new_map(bbox10(), 0);
        dag.insert_segment(&Segment::ints(1, 2, 4, 2).unwrap()).unwrap();
        // Left endpoint covertical with the previous right endpoint.
        dag.insert_segment(&Segment::ints(4, 7, 8, 7).unwrap()).unwrap();
        let zero_width = dag
            .live_trapezoids()
            .filter(|(_, t)| dag.point(t.leftp).x == dag.point(t.rightp).x)
            .count();
        assert_eq!(zero_width, 1);
        assert_eq!(dag.stats().depth, dag.recompute_max_depth());
        // Query between the covertical endpoints lands in the zero-width
        // trapezoid.
        let res = dag.locate(&Point::ints(4, 4)).unwrap();
        if let LocateKind::Face(t) = res.kind {
            let trap = dag.trapezoid(t);
            assert_eq!(dag.point(trap.leftp), &Point::ints(4, 2));
            assert_eq!(dag.point(trap.rightp), &Point::ints(4, 7));
        } else {
            panic!("expected a face answer, got {:?}", res.kind);
        }
    }
}
