//! Planar point location over subdivisions induced by pairwise interior
//! disjoint x-monotone segments.
//!
//! The structure is the classic randomized incremental trapezoidal map with
//! its history DAG: expected linear size and expected logarithmic query
//! time, made worst-case certifiable by three interchangeable post-build
//! verifiers:
//!
//! - [`build::VerifierKind::DepthThreshold`] watches the DAG depth, which is
//!   maintainable in constant time but only an upper bound on query cost;
//! - [`build::VerifierKind::LongestPath`] computes the length of the longest
//!   feasible search path by a pruned descent ([`longest_path`]);
//! - [`build::VerifierKind::ArrangementDepth`] bounds query cost through the
//!   maximum depth of the arrangement of every trapezoid ever created
//!   ([`arrangement_depth`]), at most a factor three away from the true
//!   longest path.
//!
//! A structure failing its check is rebuilt under a fresh random insertion
//! order. All geometry is exact rational arithmetic ([`geometry`]); all
//! degeneracies (shared endpoints, covertical endpoints, collinear chains)
//! are handled through lexicographic keys rather than perturbation.
//! [`scenarios`] provides input generators, including the adversarial block
//! constructions separating DAG depth from real query cost, plus a plain
//! text scene-file format.

pub mod arrangement_depth;
pub mod build;
pub mod dag;
pub mod geometry;
pub mod longest_path;
pub mod scenarios;
