//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measurements once its assertions hold. Oracles here are independent
//! of the code paths they check: brute-force scans over live trapezoids,
//! direct cover counting over the trapezoid log, slab-decomposition query
//! sampling, and grid-sampled rectangle depth.
//!
//! Run with `cargo test -p traprix-cli --test acceptance -- --nocapture`.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use traprix::arrangement_depth::{
    brute_force_depth, compute_order, max_rectangle_depth, reduce_trapezoids, OpenRect,
};
use traprix::build::{build, derive_seed, BuildConfig, InsertOrder};
use traprix::dag::{BoundingBox, Dag, LocateKind, TrapezoidRecord};
use traprix::geometry::{rational, Point, Rational};
use traprix::longest_path::max_search_path_length;
use traprix::scenarios::{gen_random_segments, gen_recursive_blocks, gen_sqrt_blocks, Scene};

fn build_dag(scene: &Scene, seed: u64, shuffled: bool) -> Dag {
    let config = BuildConfig {
        seed,
        order: if shuffled {
            InsertOrder::Shuffled
        } else {
            InsertOrder::AsGiven
        },
        validate: false,
        ..BuildConfig::default()
    };
    let dag = build(&scene.segments, &scene.bbox, &config).unwrap().dag;
    // Criterion 8, asserted on every structure the suite builds.
    let l = max_search_path_length(&dag).longest;
    assert!(l <= dag.stats().depth, "global invariant violated: L > D");
    dag
}

fn random_point(rng: &mut ChaCha8Rng, bbox: &BoundingBox) -> Point {
    const RES: i64 = 1 << 20;
    let frac = |r: &mut ChaCha8Rng| Rational::new(r.gen_range(1..RES).into(), RES.into());
    let x = &bbox.x0 + frac(rng) * (&bbox.x1 - &bbox.x0);
    let y = &bbox.y0 + frac(rng) * (&bbox.y1 - &bbox.y0);
    Point::new(x, y)
}

fn cover_count(dag: &Dag, log: &[TrapezoidRecord], p: &Point) -> u32 {
    log.iter()
        .filter(|rec| dag.open_region_contains(rec, p))
        .count() as u32
}

/// One query key strictly inside every cell of the full slab decomposition
/// (including zero-width covertical columns).
fn slab_samples(dag: &Dag) -> Vec<Point> {
    let half = rational(1, 2);
    let mut keys: Vec<Point> = dag
        .curves()
        .flat_map(|(_, s)| [s.left().clone(), s.right().clone()])
        .collect();
    keys.sort();
    keys.dedup();
    let mut samples = Vec::new();
    for w in keys.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let covertical = a.x == b.x;
        let x = if covertical {
            a.x.clone()
        } else {
            (&a.x + &b.x) * &half
        };
        let mut ys: Vec<Rational> = vec![dag.bbox().y0.clone(), dag.bbox().y1.clone()];
        for (_, s) in dag.curves() {
            if s.left().x <= x && x <= s.right().x {
                ys.push(s.y_at(&x));
            }
        }
        if covertical {
            ys.push(a.y.clone());
            ys.push(b.y.clone());
            ys.retain(|y| *y >= a.y && *y <= b.y);
        }
        ys.sort();
        ys.dedup();
        for yw in ys.windows(2) {
            let p = Point::new(x.clone(), (&yw[0] + &yw[1]) * &half);
            if dag.bbox().strictly_contains(&p) {
                samples.push(p);
            }
        }
    }
    samples
}

#[test]
fn criterion_01_oracle_point_location() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut queries = 0u64;
    for case in 0..100u64 {
        let n = 1 + (case as usize * 7) % 50;
        let scene = gen_random_segments(n, 10_000 + case).unwrap();
        let dag = build_dag(&scene, case, true);
        let live: Vec<_> = dag
            .live_trapezoids()
            .map(|(id, _)| (id, dag.record(id)))
            .collect();
        for _ in 0..1000 {
            let p = random_point(&mut rng, dag.bbox());
            let res = dag.locate(&p).unwrap();
            let mut hits = live.iter().filter(|(_, rec)| dag.open_region_contains(rec, &p));
            match res.kind {
                LocateKind::Face(t) => {
                    let (hit, _) = hits.next().expect("some live trapezoid contains the query");
                    assert_eq!(*hit, t, "wrong face at {p:?}");
                    assert!(hits.next().is_none(), "tiling violated at {p:?}");
                }
                // Random rational queries can land on input geometry only by
                // astronomical accident; verify such answers directly.
                LocateKind::Vertex(v) => assert_eq!(dag.point(v), &p),
                LocateKind::Edge(s) => {
                    let seg = dag.segment(s);
                    assert_eq!(seg.y_at(&p.x), p.y);
                }
            }
            queries += 1;
        }
    }
    println!(
        "acceptance criterion 1 PASS: {queries} queries over 100 scenes agree with the brute-force scan ({:.1?})",
        started.elapsed()
    );
}

#[test]
fn criterion_02_depth_preservation() {
    let started = Instant::now();
    for case in 0..200u64 {
        let n = 1 + (case as usize * 3) % 20;
        let scene = gen_random_segments(n, 20_000 + case).unwrap();
        let dag = build_dag(&scene, case, true);
        let log: Vec<TrapezoidRecord> = dag.trapezoid_log().collect();
        let order = compute_order(&dag).unwrap();
        let rects = reduce_trapezoids(&log, &order).unwrap();
        let reduced = max_rectangle_depth(&rects);
        let direct = slab_samples(&dag)
            .iter()
            .map(|p| cover_count(&dag, &log, p))
            .max()
            .unwrap();
        assert_eq!(reduced, direct, "case {case}: reduction changed the depth");
    }
    println!(
        "acceptance criterion 2 PASS: reduced rectangle depth equals direct trapezoid cover on 200 scenes ({:.1?})",
        started.elapsed()
    );
}

#[test]
fn criterion_03_rectangle_depth_oracle() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for case in 0..1000usize {
        let n = 1 + case % 200;
        let rects: Vec<OpenRect> = (0..n)
            .map(|_| {
                // Tight coordinate ranges force duplicated coordinates and
                // shared boundaries; no general position anywhere.
                let x = rng.gen_range(0..25);
                let w = rng.gen_range(0..6);
                let y = rng.gen_range(-12..12);
                let h = rng.gen_range(1..8);
                OpenRect {
                    x_lo: Point::ints(x, 0),
                    x_hi: Point::ints(x + w, 0),
                    y_lo: y,
                    y_hi: y + h,
                    left_closed: rng.gen(),
                    right_closed: rng.gen(),
                    bottom_closed: rng.gen(),
                    top_closed: rng.gen(),
                }
            })
            .collect();
        assert_eq!(
            max_rectangle_depth(&rects),
            brute_force_depth(&rects),
            "case {case}"
        );
    }
    println!(
        "acceptance criterion 3 PASS: sweep matches brute force on 1000 mixed-flag instances ({:.1?})",
        started.elapsed()
    );
}

#[test]
fn criterion_04_search_path_within_three_times_cover() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut checked = 0u64;
    for case in 0..50u64 {
        let n = 1 + (case as usize * 17) % 200;
        let scene = gen_random_segments(n, 40_000 + case).unwrap();
        let dag = build_dag(&scene, case, true);
        let log: Vec<TrapezoidRecord> = dag.trapezoid_log().collect();
        for _ in 0..1000 {
            let p = random_point(&mut rng, dag.bbox());
            let res = dag.locate(&p).unwrap();
            if !matches!(res.kind, LocateKind::Face(_)) {
                continue;
            }
            let cover = cover_count(&dag, &log, &p);
            assert!(
                res.path_len <= 3 * cover,
                "case {case}: path {} vs cover {cover} at {p:?}",
                res.path_len
            );
            checked += 1;
        }
    }
    println!(
        "acceptance criterion 4 PASS: {checked} query paths within three times their log cover ({:.1?})",
        started.elapsed()
    );
}

#[test]
fn criterion_05_ratio_experiment() {
    let started = Instant::now();
    let mut all_means = Vec::new();
    let mut global_max = f64::MIN;
    for n in [250usize, 500, 1000, 2000] {
        let scene_seed = derive_seed(5005, n as u64);
        let scene = gen_random_segments(n, scene_seed).unwrap();
        let mut ratios = Vec::new();
        for rep in 0..20u64 {
            let dag = build_dag(&scene, derive_seed(scene_seed, rep), true);
            let l = max_search_path_length(&dag).longest;
            let ratio = dag.stats().depth as f64 / l as f64;
            ratios.push(ratio);
        }
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
        println!("  n={n}: depth/path mean {mean:.3}, max {max:.3}");
        all_means.push(mean);
        global_max = global_max.max(max);
    }
    for mean in &all_means {
        assert!(*mean <= 1.2, "mean ratio {mean:.3} above 1.2");
    }
    assert!(global_max <= 1.4, "max ratio {global_max:.3} above 1.4");
    println!(
        "acceptance criterion 5 PASS: depth/path ratios within bounds over 80 builds ({:.1?})",
        started.elapsed()
    );
}

#[test]
fn criterion_06_sqrt_block_separation() {
    let started = Instant::now();
    let mut prev_ratio = 0.0f64;
    for k in [8usize, 16, 32] {
        let scene = gen_sqrt_blocks(k);
        let dag = build_dag(&scene, 0, false);
        let depth = dag.stats().depth as u64;
        let longest = max_search_path_length(&dag).longest as u64;
        let ratio = depth as f64 / longest as f64;
        println!("  k={k}: D={depth} L={longest} ratio={ratio:.2}");
        assert!(depth >= (k * k / 2) as u64, "k={k}: depth {depth} too small");
        assert!(longest <= 10 * k as u64, "k={k}: path {longest} too long");
        assert!(ratio > prev_ratio, "ratio must increase with k");
        prev_ratio = ratio;
    }
    println!(
        "acceptance criterion 6 PASS: forced-order block scenes separate depth from search paths ({:.1?})",
        started.elapsed()
    );
}

#[test]
fn criterion_07_recursive_block_separation() {
    let started = Instant::now();
    for n in [256usize, 1024] {
        let scene = gen_recursive_blocks(n);
        let dag = build_dag(&scene, 0, false);
        let depth = dag.stats().depth as u64;
        let longest = max_search_path_length(&dag).longest as f64;
        let bound = 8.0 * (n as f64).log2();
        println!("  n={n}: D={depth} L={longest} bound={bound:.1}");
        assert!(longest <= bound, "n={n}: path {longest} above {bound:.1}");
        assert!(depth >= (n / 4) as u64, "n={n}: depth {depth} below n/4");
    }
    println!(
        "acceptance criterion 7 PASS: recursive scenes keep logarithmic paths at linear depth ({:.1?})",
        started.elapsed()
    );
}

#[test]
fn criterion_08_longest_path_never_exceeds_depth() {
    let started = Instant::now();
    // Criterion 8 is asserted inside build_dag for every structure the
    // suite creates; this test exercises an extra spread of scene shapes.
    let mut scenes = vec![
        gen_sqrt_blocks(5),
        gen_recursive_blocks(64),
        gen_random_segments(150, 808).unwrap(),
    ];
    scenes.push(gen_random_segments(1, 809).unwrap());
    for (i, scene) in scenes.iter().enumerate() {
        for shuffled in [false, true] {
            let dag = build_dag(scene, i as u64, shuffled);
            let st = max_search_path_length(&dag);
            assert!(st.longest <= dag.stats().depth);
        }
    }
    println!(
        "acceptance criterion 8 PASS: L <= D on every DAG built by the suite ({:.1?})",
        started.elapsed()
    );
}

#[test]
fn criterion_09_path_count_regression_bound() {
    // Frozen on first calibration: observed means near 1.37 with maxima
    // under 1.9; the regression bound leaves headroom without hiding a
    // regression to quadratic growth.
    const PATHS_PER_N_LOG_N: f64 = 2.0;
    let started = Instant::now();
    let n = 500usize;
    let mut ratios = Vec::new();
    for case in 0..30u64 {
        let scene = gen_random_segments(n, 90_000 + case).unwrap();
        let dag = build_dag(&scene, case, true);
        let paths = max_search_path_length(&dag).feasible_paths as f64;
        ratios.push(paths / (n as f64 * (n as f64).log2()));
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    assert!(
        mean <= PATHS_PER_N_LOG_N,
        "mean path-count ratio {mean:.3} above the frozen bound"
    );
    println!(
        "acceptance criterion 9 PASS: mean feasible-path count ratio {mean:.3} within frozen bound {PATHS_PER_N_LOG_N} ({:.1?})",
        started.elapsed()
    );
}

#[test]
fn criterion_10_ratio_csv_determinism() {
    let started = Instant::now();
    let run = || {
        let out = std::process::Command::new(env!("CARGO_BIN_EXE_traprix"))
            .args([
                "ratio",
                "--scenario",
                "random",
                "--n-list",
                "64,128",
                "--repeats",
                "3",
                "--seed",
                "11",
            ])
            .output()
            .expect("harness binary runs");
        assert!(out.status.success());
        out.stdout
    };
    let first = run();
    let second = run();
    assert_eq!(first, second, "repeated invocations must be byte-identical");

    // Every data row re-parses against the fixed schema.
    let text = String::from_utf8(first).unwrap();
    let mut rows = 0;
    for line in text.lines().skip(1) {
        if line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 11, "schema violation in {line:?}");
        for idx in [1, 2, 3, 4, 6, 7, 8, 9, 10] {
            fields[idx].parse::<u64>().unwrap_or_else(|_| panic!("bad row {line:?}"));
        }
        fields[5].parse::<f64>().unwrap();
        rows += 1;
    }
    assert_eq!(rows, 6, "expected 6 data rows");
    println!(
        "acceptance criterion 10 PASS: identical invocations emit byte-identical CSV ({:.1?})",
        started.elapsed()
    );
}
