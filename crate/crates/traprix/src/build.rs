//! Construction with rebuilds.
//!
//! A build shuffles the input with a seeded generator and inserts
//! incrementally. The node count is watched during construction; after
//! construction the configured verifier decides whether the structure
//! certifies the query-time bound. A failed check discards the DAG and
//! rebuilds under a fresh permutation whose seed derives deterministically
//! from the previous one, up to a configured rebuild budget.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::arrangement_depth::verify_arrangement_depth;
use crate::dag::{BoundingBox, Dag};
use crate::geometry::{segments_interior_disjoint, Segment};
use crate::longest_path::max_search_path_length;

/// Post-construction verification strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VerifierKind {
    /// Accept whatever the randomized construction produced.
    #[default]
    None,
    /// Rebuild when the DAG depth exceeds `depth_c * log2(n + 1)`.
    DepthThreshold,
    /// Rebuild when the longest feasible search path exceeds the bound.
    LongestPath,
    /// Rebuild when the maximum depth of the arrangement of all created
    /// trapezoids exceeds the bound; certifies search paths within three
    /// times the bound.
    ArrangementDepth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InsertOrder {
    /// Seeded shuffle on every attempt.
    #[default]
    Shuffled,
    /// First attempt inserts in the given order; rebuilds still shuffle.
    AsGiven,
}

#[derive(Debug, Clone)]
pub struct BuildConfig {
    pub seed: u64,
    pub order: InsertOrder,
    pub verifier: VerifierKind,
    /// Construction aborts once node_count exceeds `size_c * n`.
    pub size_c: f64,
    /// Depth/path bound is `depth_c * log2(n + 1)`.
    pub depth_c: f64,
    pub max_rebuilds: u32,
    /// Pairwise-validate the input before the first attempt. Callers that
    /// already validated the scene can switch this off.
    pub validate: bool,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            seed: 0,
            order: InsertOrder::Shuffled,
            verifier: VerifierKind::None,
            size_c: 12.0,
            depth_c: 6.0,
            max_rebuilds: 32,
            validate: true,
        }
    }
}

/// Why an attempt ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttemptVerdict {
    Accepted,
    SizeExceeded { node_count: usize, after_insert: usize },
    DepthExceeded { depth: u32 },
    PathExceeded { longest: u32 },
    ArrDepthExceeded { max_depth: u32 },
}

#[derive(Debug, Clone)]
pub struct BuildAttempt {
    pub seed: u64,
    pub node_count: usize,
    pub depth: u32,
    pub verdict: AttemptVerdict,
}

pub struct BuildOutcome {
    pub dag: Dag,
    pub rebuilds: u32,
    pub per_build: Vec<BuildAttempt>,
}

impl std::fmt::Debug for BuildOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BuildOutcome")
            .field("stats", &self.dag.stats())
            .field("rebuilds", &self.rebuilds)
            .field("per_build", &self.per_build)
            .finish()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error("segments {first} and {second} are not interior disjoint")]
    ValidationFailed { first: usize, second: usize },
    #[error("segment {index} is not strictly inside the bounding box")]
    SegmentOutOfBox { index: usize },
    #[error("rebuild limit exceeded after {attempts} attempts")]
    RebuildLimitExceeded { attempts: u32 },
}

/// Splitmix-style derivation so attempt k of a build is reproducible from
/// the top-level seed alone.
pub fn derive_seed(seed: u64, k: u64) -> u64 {
    let mut z = seed ^ k.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn depth_bound(depth_c: f64, n: usize) -> f64 {
    depth_c * ((n + 1) as f64).log2()
}

/// Builds a verified point-location structure over `segments`.
pub fn build(
    segments: &[Segment],
    bbox: &BoundingBox,
    config: &BuildConfig,
) -> Result<BuildOutcome, BuildError> {
    let n = segments.len();
    if config.validate {
        for (i, s) in segments.iter().enumerate() {
            if !bbox.strictly_contains(s.left()) || !bbox.strictly_contains(s.right()) {
                return Err(BuildError::SegmentOutOfBox { index: i });
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (&segments[i], &segments[j]);
                if a.right().x < b.left().x || b.right().x < a.left().x {
                    continue;
                }
                if !segments_interior_disjoint(a, b) {
                    return Err(BuildError::ValidationFailed { first: i, second: j });
                }
            }
        }
    }

    let size_limit = config.size_c * n as f64;
    let bound = depth_bound(config.depth_c, n);
    let mut per_build = Vec::new();

    for attempt in 0..=config.max_rebuilds {
        let attempt_seed = derive_seed(config.seed, attempt as u64);
        let mut order: Vec<usize> = (0..n).collect();
        let shuffle = attempt > 0 || config.order == InsertOrder::Shuffled;
        if shuffle {
            let mut rng = ChaCha8Rng::seed_from_u64(attempt_seed);
            order.shuffle(&mut rng);
        }

        let mut dag = Dag::new_map(bbox.clone(), attempt_seed);
        let mut verdict = AttemptVerdict::Accepted;
        for (pos, &idx) in order.iter().enumerate() {
            dag.insert_segment_unchecked(&segments[idx]);
            if n > 0 && dag.node_count() as f64 > size_limit {
                verdict = AttemptVerdict::SizeExceeded {
                    node_count: dag.node_count(),
                    after_insert: pos + 1,
                };
                break;
            }
        }

        if verdict == AttemptVerdict::Accepted && n > 0 {
            verdict = match config.verifier {
                VerifierKind::None => AttemptVerdict::Accepted,
                VerifierKind::DepthThreshold => {
                    let d = dag.stats().depth;
                    if (d as f64) > bound {
                        AttemptVerdict::DepthExceeded { depth: d }
                    } else {
                        AttemptVerdict::Accepted
                    }
                }
                VerifierKind::LongestPath => {
                    let l = max_search_path_length(&dag).longest;
                    if (l as f64) > bound {
                        AttemptVerdict::PathExceeded { longest: l }
                    } else {
                        AttemptVerdict::Accepted
                    }
                }
                VerifierKind::ArrangementDepth => {
                    let report = verify_arrangement_depth(&dag, bound.floor() as u32)
                        .expect("freshly built map yields a consistent curve order");
                    if report.certified {
                        AttemptVerdict::Accepted
                    } else {
                        AttemptVerdict::ArrDepthExceeded {
                            max_depth: report.max_depth,
                        }
                    }
                }
            };
        }

        per_build.push(BuildAttempt {
            seed: attempt_seed,
            node_count: dag.node_count(),
            depth: dag.stats().depth,
            verdict,
        });
        if verdict == AttemptVerdict::Accepted {
            return Ok(BuildOutcome {
                dag,
                rebuilds: attempt,
                per_build,
            });
        }
    }

    Err(BuildError::RebuildLimitExceeded {
        attempts: config.max_rebuilds + 1,
    })
}
