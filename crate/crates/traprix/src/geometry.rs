//! Exact rational kernel: points, x-monotone segments and the predicates
//! everything else is built on.
//!
//! All coordinates are arbitrary-precision rationals, so every predicate is
//! exact. There is no floating-point filtering layer: correctness first.

use std::cmp::Ordering;
use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

/// Exact rational coordinate. Kept in canonical form (reduced, positive
/// denominator) by `num-rational`.
pub type Rational = BigRational;

/// Builds a rational from an integer numerator and denominator.
///
/// Panics if `den == 0`.
pub fn rational(num: i64, den: i64) -> Rational {
    assert!(den != 0, "rational denominator must be nonzero");
    BigRational::new(num.into(), den.into())
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    /// Segment endpoints coincide.
    #[error("degenerate segment: endpoints coincide")]
    DegenerateSegment,
    /// Vertical input segments are rejected; vertical walls are structural,
    /// never input geometry.
    #[error("vertical segment rejected")]
    VerticalSegment,
    /// A vertical comparison was requested outside the segment's x-range.
    #[error("query x outside segment x-range")]
    XRangeViolation,
}

/// A point in the plane; doubles as the lexicographic key used for every
/// x-comparison in the search structure.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Point {
    pub x: Rational,
    pub y: Rational,
}

impl Point {
    pub fn new(x: Rational, y: Rational) -> Self {
        Point { x, y }
    }

    /// Integer-coordinate point, convenient in tests and generators.
    pub fn ints(x: i64, y: i64) -> Self {
        Point::new(rational(x, 1), rational(y, 1))
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Lexicographic order: by x, ties broken by y. Co-vertical endpoints thus
/// stay totally ordered, which is what produces zero-width virtual
/// trapezoids instead of symbolic perturbation.
impl Ord for Point {
    fn cmp(&self, other: &Self) -> Ordering {
        self.x.cmp(&other.x).then_with(|| self.y.cmp(&other.y))
    }
}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Compares two points lexicographically (x first, then y).
pub fn cmp_lex(p: &Point, q: &Point) -> Ordering {
    p.cmp(q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Ccw,
    Collinear,
    Cw,
}

/// Sign of the determinant of (q - p, r - p).
pub fn orientation(p: &Point, q: &Point, r: &Point) -> Orientation {
    let det = (&q.x - &p.x) * (&r.y - &p.y) - (&q.y - &p.y) * (&r.x - &p.x);
    match det.cmp(&Rational::zero()) {
        Ordering::Greater => Orientation::Ccw,
        Ordering::Equal => Orientation::Collinear,
        Ordering::Less => Orientation::Cw,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerticalSide {
    Above,
    On,
    Below,
}

/// An x-monotone segment, oriented so that `left < right` lexicographically.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Segment {
    left: Point,
    right: Point,
}

impl Segment {
    /// Normalizing constructor. Vertical and degenerate inputs are rejected
    /// at ingestion.
    pub fn new(a: Point, b: Point) -> Result<Self, GeometryError> {
        if a == b {
            return Err(GeometryError::DegenerateSegment);
        }
        if a.x == b.x {
            return Err(GeometryError::VerticalSegment);
        }
        if a.x < b.x {
            Ok(Segment { left: a, right: b })
        } else {
            Ok(Segment { left: b, right: a })
        }
    }

    /// Integer-coordinate segment, convenient in tests and generators.
    pub fn ints(ax: i64, ay: i64, bx: i64, by: i64) -> Result<Self, GeometryError> {
        Segment::new(Point::ints(ax, ay), Point::ints(bx, by))
    }

    pub fn left(&self) -> &Point {
        &self.left
    }

    pub fn right(&self) -> &Point {
        &self.right
    }

    /// Exact y-coordinate of the segment's supporting line at `x`.
    ///
    /// Callers must keep `x` within the closed x-range (checked in debug).
    pub fn y_at(&self, x: &Rational) -> Rational {
        debug_assert!(*x >= self.left.x && *x <= self.right.x);
        let t = (x - &self.left.x) / (&self.right.x - &self.left.x);
        &self.left.y + t * (&self.right.y - &self.left.y)
    }
}

impl fmt::Debug for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?} -- {:?}]", self.left, self.right)
    }
}

/// Exact vertical comparison of `p` against the line through `s`.
///
/// Errors with `XRangeViolation` when `p.x` falls outside the closed
/// x-range of `s`; inside the search structure that would signal a broken
/// descent invariant, not bad input.
pub fn point_vs_segment(p: &Point, s: &Segment) -> Result<VerticalSide, GeometryError> {
    if p.x < s.left.x || p.x > s.right.x {
        return Err(GeometryError::XRangeViolation);
    }
    // s is oriented left-to-right, so CCW means p lies above the line.
    Ok(match orientation(&s.left, &s.right, p) {
        Orientation::Ccw => VerticalSide::Above,
        Orientation::Collinear => VerticalSide::On,
        Orientation::Cw => VerticalSide::Below,
    })
}

fn on_segment_closed(p: &Point, s: &Segment) -> bool {
    orientation(&s.left, &s.right, p) == Orientation::Collinear
        && *p >= s.left
        && *p <= s.right
}

/// True iff the two segments share at most points that are endpoints of
/// *both*. Proper crossings, overlapping collinear pieces and T-contacts
/// (an endpoint in the other segment's interior) all return false.
pub fn segments_interior_disjoint(a: &Segment, b: &Segment) -> bool {
    let o1 = orientation(&a.left, &a.right, &b.left);
    let o2 = orientation(&a.left, &a.right, &b.right);
    let o3 = orientation(&b.left, &b.right, &a.left);
    let o4 = orientation(&b.left, &b.right, &a.right);

    if o1 == Orientation::Collinear && o2 == Orientation::Collinear {
        // Collinear supporting lines: the intersection is the overlap of the
        // lexicographic intervals. Only a single shared endpoint is allowed.
        let lo = a.left.clone().max(b.left.clone());
        let hi = a.right.clone().min(b.right.clone());
        return match lo.cmp(&hi) {
            Ordering::Greater => true,
            Ordering::Equal => {
                (lo == a.left || lo == a.right) && (lo == b.left || lo == b.right)
            }
            Ordering::Less => false,
        };
    }

    // Endpoint-on-segment contacts must be endpoint-to-endpoint.
    for (p, s, own) in [
        (&b.left, a, b),
        (&b.right, a, b),
        (&a.left, b, a),
        (&a.right, b, a),
    ] {
        if on_segment_closed(p, s) {
            let shared = (*p == s.left || *p == s.right) && (*p == own.left || *p == own.right);
            if !shared {
                return false;
            }
        }
    }

    // Proper crossing: strictly opposite orientations on both sides.
    let opposite = |u: Orientation, v: Orientation| {
        matches!(
            (u, v),
            (Orientation::Ccw, Orientation::Cw) | (Orientation::Cw, Orientation::Ccw)
        )
    };
    !(opposite(o1, o2) && opposite(o3, o4))
}
