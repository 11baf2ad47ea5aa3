//! Scene generators and segment-file I/O.
//!
//! Three generators: random non-crossing segments in the unit-ish square,
//! the k-block construction whose top-to-bottom insertion drives the DAG
//! depth to Theta(n) while queries stay O(sqrt n), and its recursive
//! refinement where queries stay logarithmic. The block layouts use integer
//! coordinates; only the adjacency pattern matters, so any coordinates
//! realizing it are equally good and integers keep the exact arithmetic
//! cheap.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dag::BoundingBox;
use crate::geometry::{segments_interior_disjoint, Point, Rational, Segment};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("segments {first} and {second} are not interior disjoint")]
    NotDisjoint { first: usize, second: usize },
    #[error("segment {index} is not strictly inside the bounding box")]
    OutOfBox { index: usize },
    #[error("generation stalled after {rejects} consecutive rejections")]
    GenerationStalled { rejects: u32 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A validated set of input segments together with its frame.
///
/// `suggested_order` is an optional insertion permutation (indices into
/// `segments`); `None` means the vector order is the suggestion. The
/// generators emit segments already in their suggested order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scene {
    pub segments: Vec<Segment>,
    pub suggested_order: Option<Vec<usize>>,
    pub bbox: BoundingBox,
}

impl Scene {
    /// Segments in suggested insertion order.
    pub fn ordered_segments(&self) -> Vec<Segment> {
        match &self.suggested_order {
            None => self.segments.clone(),
            Some(perm) => perm.iter().map(|&i| self.segments[i].clone()).collect(),
        }
    }

    /// Full pairwise interior-disjointness plus in-frame validation.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        for (i, s) in self.segments.iter().enumerate() {
            if !self.bbox.strictly_contains(s.left()) || !self.bbox.strictly_contains(s.right()) {
                return Err(ScenarioError::OutOfBox { index: i });
            }
        }
        for i in 0..self.segments.len() {
            let a = &self.segments[i];
            for (jo, b) in self.segments[i + 1..].iter().enumerate() {
                // Cheap x-range reject before the exact test.
                if a.right().x < b.left().x || b.right().x < a.left().x {
                    continue;
                }
                if !segments_interior_disjoint(a, b) {
                    return Err(ScenarioError::NotDisjoint {
                        first: i,
                        second: i + 1 + jo,
                    });
                }
            }
        }
        Ok(())
    }
}

// -------------------------------------------------------------------------
// Random segments
// -------------------------------------------------------------------------

/// Coordinate grid resolution: endpoints are multiples of 1/GRID_RES in
/// [-1, 1], so the rejection loop can run on machine integers while the
/// emitted scene stays exact.
const GRID_RES: i64 = 1 << 20;
const REJECT_LIMIT: u32 = 100_000;

#[derive(Clone, Copy)]
struct IntSeg {
    ax: i64,
    ay: i64,
    bx: i64,
    by: i64,
}

fn sign(v: i128) -> i32 {
    match v.cmp(&0) {
        std::cmp::Ordering::Greater => 1,
        std::cmp::Ordering::Equal => 0,
        std::cmp::Ordering::Less => -1,
    }
}

fn orient_int(px: i64, py: i64, qx: i64, qy: i64, rx: i64, ry: i64) -> i32 {
    sign((qx - px) as i128 * (ry - py) as i128 - (qy - py) as i128 * (rx - px) as i128)
}

fn on_closed(px: i64, py: i64, s: &IntSeg) -> bool {
    orient_int(s.ax, s.ay, s.bx, s.by, px, py) == 0
        && px >= s.ax.min(s.bx)
        && px <= s.ax.max(s.bx)
        && py >= s.ay.min(s.by)
        && py <= s.ay.max(s.by)
}

/// Closed intersection test on integer segments; any touching counts.
fn int_segments_touch(a: &IntSeg, b: &IntSeg) -> bool {
    let d1 = orient_int(b.ax, b.ay, b.bx, b.by, a.ax, a.ay);
    let d2 = orient_int(b.ax, b.ay, b.bx, b.by, a.bx, a.by);
    let d3 = orient_int(a.ax, a.ay, a.bx, a.by, b.ax, b.ay);
    let d4 = orient_int(a.ax, a.ay, a.bx, a.by, b.bx, b.by);
    if ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)) {
        return true;
    }
    (d1 == 0 && on_closed(a.ax, a.ay, b))
        || (d2 == 0 && on_closed(a.bx, a.by, b))
        || (d3 == 0 && on_closed(b.ax, b.ay, a))
        || (d4 == 0 && on_closed(b.bx, b.by, a))
}

/// `n` pairwise non-crossing segments with endpoints drawn uniformly from
/// the grid in [-1,1]^2. Candidates touching an accepted segment anywhere
/// (shared endpoints included) are rejected. Deterministic in `seed`.
pub fn gen_random_segments(n: usize, seed: u64) -> Result<Scene, ScenarioError> {
    gen_random_impl(n, seed, GRID_RES, REJECT_LIMIT)
}

fn gen_random_impl(
    n: usize,
    seed: u64,
    res: i64,
    reject_limit: u32,
) -> Result<Scene, ScenarioError> {
    const CELLS: i64 = 64;
    let cell_of = |v: i64| -> i64 { ((v + res) * CELLS / (2 * res + 1)).clamp(0, CELLS - 1) };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut accepted: Vec<IntSeg> = Vec::with_capacity(n);
    let mut cells: HashMap<(i64, i64), Vec<u32>> = HashMap::new();
    let mut stamp: Vec<u32> = Vec::new();
    let mut candidate_id = 0u32;
    let mut rejects = 0u32;

    while accepted.len() < n {
        if rejects >= reject_limit {
            return Err(ScenarioError::GenerationStalled { rejects });
        }
        let ax = rng.gen_range(-res..=res);
        let ay = rng.gen_range(-res..=res);
        let bx = rng.gen_range(-res..=res);
        let by = rng.gen_range(-res..=res);
        if ax == bx {
            rejects += 1;
            continue;
        }
        let cand = if (ax, ay) < (bx, by) {
            IntSeg { ax, ay, bx, by }
        } else {
            IntSeg {
                ax: bx,
                ay: by,
                bx: ax,
                by: ay,
            }
        };
        candidate_id += 1;

        let (clo_x, chi_x) = (cell_of(cand.ax.min(cand.bx)), cell_of(cand.ax.max(cand.bx)));
        let (clo_y, chi_y) = (cell_of(cand.ay.min(cand.by)), cell_of(cand.ay.max(cand.by)));
        let mut hit = false;
        'scan: for cx in clo_x..=chi_x {
            for cy in clo_y..=chi_y {
                if let Some(ids) = cells.get(&(cx, cy)) {
                    for &i in ids {
                        if stamp[i as usize] == candidate_id {
                            continue;
                        }
                        stamp[i as usize] = candidate_id;
                        if int_segments_touch(&cand, &accepted[i as usize]) {
                            hit = true;
                            break 'scan;
                        }
                    }
                }
            }
        }
        if hit {
            rejects += 1;
            continue;
        }
        let idx = accepted.len() as u32;
        accepted.push(cand);
        stamp.push(0);
        for cx in clo_x..=chi_x {
            for cy in clo_y..=chi_y {
                cells.entry((cx, cy)).or_default().push(idx);
            }
        }
        rejects = 0;
    }

    let segments = accepted
        .iter()
        .map(|s| {
            Segment::new(
                Point::new(Rational::new(s.ax.into(), res.into()), Rational::new(s.ay.into(), res.into())),
                Point::new(Rational::new(s.bx.into(), res.into()), Rational::new(s.by.into(), res.into())),
            )
            .expect("grid candidates are non-vertical")
        })
        .collect();
    Ok(Scene {
        segments,
        suggested_order: None,
        bbox: BoundingBox::ints(-2, -2, 2, 2).expect("static frame"),
    })
}

// -------------------------------------------------------------------------
// Adversarial block constructions
// -------------------------------------------------------------------------

fn horizontal(x0: i64, x1: i64, y: i64) -> Segment {
    Segment::ints(x0, y, x1, y).expect("block segments are horizontal and non-degenerate")
}

/// k blocks of k horizontal segments. Each block opens with a long cover
/// segment and shrinks the following segments from both sides; the next
/// block sits lower and to the left, its cover reaching right underneath
/// the previous block's deepest slab. Inserted top to bottom (the emission
/// order), every segment splits the currently deepest trapezoid.
pub fn gen_sqrt_blocks(k: usize) -> Scene {
    assert!(k >= 1, "block count must be positive");
    let ki = k as i64;
    let mut segments = Vec::with_capacity(k * k);
    let block_left = |j: i64| -(j * (2 * ki + 2));
    for j in 0..ki {
        let left = block_left(j);
        let core_right = left + 2 * ki;
        let top_y = (ki - j) * (ki + 1);
        let cover_right = if j == 0 {
            core_right
        } else {
            // Dead center of the previous block's deepest slab.
            block_left(j - 1) + ki
        };
        segments.push(horizontal(left, cover_right, top_y));
        for i in 1..ki {
            segments.push(horizontal(left + i, core_right - i, top_y - i));
        }
    }
    let x_lo = block_left(ki - 1) - 2;
    let x_hi = 2 * ki + 2;
    let y_hi = ki * (ki + 1) + 2;
    Scene {
        segments,
        suggested_order: None,
        bbox: BoundingBox::ints(x_lo, 0, x_hi, y_hi).expect("block frame"),
    }
}

fn recursive_schedule(m: usize) -> Vec<usize> {
    let mut sizes = Vec::new();
    let mut rem = m;
    let mut i = 1;
    while rem > 0 {
        let s = std::cmp::max(1, m >> i).min(rem);
        sizes.push(s);
        rem -= s;
        i += 1;
    }
    sizes
}

fn recursive_core_width(m: usize, memo: &mut HashMap<usize, i64>) -> i64 {
    if let Some(&w) = memo.get(&m) {
        return w;
    }
    let w = if m == 0 {
        0
    } else {
        let sizes = recursive_schedule(m);
        let cores: i64 = sizes
            .iter()
            .map(|&s| {
                if s == 1 {
                    2
                } else {
                    recursive_core_width(s - 1, memo) + 2
                }
            })
            .sum();
        cores + 2 * (sizes.len() as i64 - 1)
    };
    memo.insert(m, w);
    w
}

/// Places one level of blocks right to left; every emitted segment takes
/// the next lower y. Returns the x aimed at by a later cover that wants to
/// split this level's deepest trapezoid.
fn place_recursive(
    m: usize,
    right: i64,
    y: &mut i64,
    memo: &mut HashMap<usize, i64>,
    out: &mut Vec<Segment>,
) -> i64 {
    let sizes = recursive_schedule(m);
    let mut cursor_right = right;
    let mut prev_deep: Option<i64> = None;
    let mut deep = right;
    for &s in &sizes {
        let core_w = if s == 1 {
            2
        } else {
            recursive_core_width(s - 1, memo) + 2
        };
        let core_left = cursor_right - core_w;
        let cover_right = prev_deep.unwrap_or(cursor_right);
        *y -= 1;
        out.push(horizontal(core_left, cover_right, *y));
        deep = if s > 1 {
            place_recursive(s - 1, cursor_right - 1, y, memo, out)
        } else {
            core_left + 1
        };
        prev_deep = Some(deep);
        cursor_right = core_left - 2;
    }
    deep
}

/// The recursive lower-bound construction: a level is a chain of blocks of
/// roughly halving sizes, and each block nests the same scheme under its
/// cover. Top-to-bottom insertion yields linear depth with logarithmic
/// search paths.
pub fn gen_recursive_blocks(n: usize) -> Scene {
    assert!(n >= 1, "segment count must be positive");
    let mut memo = HashMap::new();
    let mut segments = Vec::with_capacity(n);
    let mut y = n as i64 + 2;
    place_recursive(n, 0, &mut y, &mut memo, &mut segments);
    debug_assert_eq!(segments.len(), n);
    let x_lo = segments
        .iter()
        .map(|s| i64::try_from(s.left().x.to_integer()).expect("layout fits i64"))
        .min()
        .expect("at least one segment")
        - 2;
    Scene {
        segments,
        suggested_order: None,
        bbox: BoundingBox::ints(x_lo, 0, 2, n as i64 + 4).expect("block frame"),
    }
}

// -------------------------------------------------------------------------
// Scene files
// -------------------------------------------------------------------------

fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Renders a scene in the text format: a `bbox` header line, then one
/// segment per line as four whitespace-separated rationals.
pub fn scene_to_string(scene: &Scene) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "bbox {} {} {} {}",
        format_rational(&scene.bbox.x0),
        format_rational(&scene.bbox.y0),
        format_rational(&scene.bbox.x1),
        format_rational(&scene.bbox.y1),
    );
    for s in scene.ordered_segments() {
        let _ = writeln!(
            out,
            "{} {} {} {}",
            format_rational(&s.left().x),
            format_rational(&s.left().y),
            format_rational(&s.right().x),
            format_rational(&s.right().y),
        );
    }
    out
}

pub fn write_scene(scene: &Scene, path: &Path) -> Result<(), ScenarioError> {
    std::fs::write(path, scene_to_string(scene))?;
    Ok(())
}

fn parse_rational(tok: &str, line: usize) -> Result<Rational, ScenarioError> {
    Rational::from_str(tok).map_err(|e| ScenarioError::Parse {
        line,
        msg: format!("bad rational {tok:?}: {e}"),
    })
}

/// Parses and fully validates a scene from the text format. `#` starts a
/// comment; blank lines are ignored; bare integers are accepted as
/// rationals with denominator one.
pub fn scene_from_str(text: &str) -> Result<Scene, ScenarioError> {
    let mut bbox: Option<BoundingBox> = None;
    let mut segments = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        if bbox.is_none() {
            if toks.next() != Some("bbox") {
                return Err(ScenarioError::Parse {
                    line: line_no,
                    msg: "expected `bbox x0 y0 x1 y1` header".into(),
                });
            }
            let mut vals = Vec::with_capacity(4);
            for tok in toks {
                vals.push(parse_rational(tok, line_no)?);
            }
            if vals.len() != 4 {
                return Err(ScenarioError::Parse {
                    line: line_no,
                    msg: format!("bbox needs 4 coordinates, found {}", vals.len()),
                });
            }
            let [x0, y0, x1, y1] = match <[Rational; 4]>::try_from(vals) {
                Ok(v) => v,
                Err(_) => unreachable!(),
            };
            bbox = Some(BoundingBox::new(x0, y0, x1, y1).map_err(|_| {
                ScenarioError::Parse {
                    line: line_no,
                    msg: "bounding box must have positive width and height".into(),
                }
            })?);
            continue;
        }
        let mut vals = Vec::with_capacity(4);
        for tok in toks {
            vals.push(parse_rational(tok, line_no)?);
        }
        if vals.len() != 4 {
            return Err(ScenarioError::Parse {
                line: line_no,
                msg: format!("segment needs 4 coordinates, found {}", vals.len()),
            });
        }
        let [ax, ay, bx, by] = match <[Rational; 4]>::try_from(vals) {
            Ok(v) => v,
            Err(_) => unreachable!(),
        };
        let seg = Segment::new(Point::new(ax, ay), Point::new(bx, by)).map_err(|e| {
            ScenarioError::Parse {
                line: line_no,
                msg: e.to_string(),
            }
        })?;
        segments.push(seg);
    }
    let bbox = bbox.ok_or(ScenarioError::Parse {
        line: text.lines().count() + 1,
        msg: "missing bbox header".into(),
    })?;
    let scene = Scene {
        segments,
        suggested_order: None,
        bbox,
    };
    scene.validate()?;
    Ok(scene)
}

pub fn read_scene(path: &Path) -> Result<Scene, ScenarioError> {
    let text = std::fs::read_to_string(path)?;
    scene_from_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rational;

    #[test]
    fn random_scene_examples() {
        assert!(gen_random_segments(0, 1).unwrap().segments.is_empty());
        let one = gen_random_segments(1, 42).unwrap();
        assert_eq!(one.segments.len(), 1);
        let s = &one.segments[0];
        for p in [s.left(), s.right()] {
            assert!(p.x >= rational(-1, 1) && p.x <= rational(1, 1));
            assert!(p.y >= rational(-1, 1) && p.y <= rational(1, 1));
        }
    }

    #[test]
    fn random_scene_pairwise_disjoint() {
        let scene = gen_random_segments(200, 7).unwrap();
        assert_eq!(scene.segments.len(), 200);
        scene.validate().unwrap();
    }

    #[test]
    fn random_scene_deterministic() {
        let a = gen_random_segments(60, 99).unwrap();
        let b = gen_random_segments(60, 99).unwrap();
        assert_eq!(a, b);
        let c = gen_random_segments(60, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn generation_stalls_on_saturated_grid() {
        // A 3x3 grid cannot host 50 segments that never touch.
        let err = gen_random_impl(50, 3, 1, 500);
        assert!(matches!(err, Err(ScenarioError::GenerationStalled { .. })));
    }

    #[test]
    fn sqrt_blocks_shape() {
        assert_eq!(gen_sqrt_blocks(1).segments.len(), 1);
        for k in [2usize, 3, 5, 8] {
            let scene = gen_sqrt_blocks(k);
            assert_eq!(scene.segments.len(), k * k);
            scene.validate().unwrap();
            // Emission order is strictly top to bottom.
            let ys: Vec<_> = scene.segments.iter().map(|s| s.left().y.clone()).collect();
            assert!(ys.windows(2).all(|w| w[0] > w[1]));
        }
    }

    #[test]
    fn recursive_blocks_shape() {
        assert_eq!(gen_recursive_blocks(1).segments.len(), 1);
        for n in [2usize, 3, 7, 64, 100] {
            let scene = gen_recursive_blocks(n);
            assert_eq!(scene.segments.len(), n);
            scene.validate().unwrap();
            let ys: Vec<_> = scene.segments.iter().map(|s| s.left().y.clone()).collect();
            assert!(ys.windows(2).all(|w| w[0] > w[1]));
        }
    }

    #[test]
    fn recursive_schedule_follows_halving() {
        let sizes = recursive_schedule(256);
        assert_eq!(sizes[0], 128);
        assert_eq!(sizes[1], 64);
        assert_eq!(sizes.iter().sum::<usize>(), 256);
        // Every block is at most half the remaining mass, within rounding.
        for (i, &s) in sizes.iter().enumerate() {
            assert!(s == 1 || s == 256 >> (i + 1));
        }
    }

    #[test]
    fn scene_roundtrip() {
        for scene in [
            gen_random_segments(40, 5).unwrap(),
            gen_sqrt_blocks(3),
            gen_recursive_blocks(9),
        ] {
            let text = scene_to_string(&scene);
            let back = scene_from_str(&text).unwrap();
            assert_eq!(scene, back);
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad_rational = "bbox -2 -2 2 2\n0 0 1 x\n";
        match scene_from_str(bad_rational) {
            Err(ScenarioError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        let bad_header = "0 0 1 1\n";
        assert!(matches!(
            scene_from_str(bad_header),
            Err(ScenarioError::Parse { line: 1, .. })
        ));
        let comments_ok = "# comment\nbbox 0 0 10 10\n1 1 2 2 # tail\n";
        assert_eq!(scene_from_str(comments_ok).unwrap().segments.len(), 1);
        let bare_ints = "bbox -2 -2 2 2\n-1/2 0 1/2 1/4\n";
        assert_eq!(scene_from_str(bare_ints).unwrap().segments.len(), 1);
    }

    #[test]
    fn crossing_segments_fail_validation() {
        let crossing = "bbox -5 -5 5 5\n0 0 2 2\n0 2 2 0\n";
        match scene_from_str(crossing) {
            Err(ScenarioError::NotDisjoint { first, second }) => {
                assert_eq!((first, second), (0, 1));
            }
            other => panic!("expected validation failure, got {other:?}"),
        }
        let outside = "bbox 0 0 1 1\n0 0 2 2\n";
        assert!(matches!(
            scene_from_str(outside),
            Err(ScenarioError::OutOfBox { index: 0 })
        ));
    }
}
