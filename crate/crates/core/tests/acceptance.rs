//! Acceptance suite. Runs every criterion in sequence (so timings are not
//! disturbed by parallel tests), prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use raycut::cutbuilder::{apply_refinement, assemble_network, estimate_mean, BuildConfig, CostField, RefinementSeed};
use raycut::evalbench::{
    boundary_cost, brute_force_boundary, brute_force_min_cut, dice, run_benchmark, BenchmarkSetup,
};
use raycut::flownet::{max_flow, Capacity, FlowNetwork, Vertex};
use raycut::imaging::{make_phantom, Mask, PhantomKind, PhantomSpec, ScalarGrid};
use raycut::segmenter::{extract_boundary, segment, SegmentationRequest, SegmentationResult};
use raycut::service::{SessionStore, PRIMARY_SEED_ID};
use raycut::templates::{generate_rays, generate_rays_with_layout, NodeIndex, Template};
use raycut::{Error, Point};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Every segmentation produced by the suite, re-checked by criterion 3.
#[derive(Default)]
struct Ledger {
    runs: Vec<(ScalarGrid, SegmentationRequest, SegmentationResult)>,
}

impl Ledger {
    fn segment(&mut self, grid: &ScalarGrid, req: &SegmentationRequest) -> Result<SegmentationResult, Error> {
        let res = segment(grid, req)?;
        self.runs.push((grid.clone(), req.clone(), res.clone()));
        Ok(res)
    }
}

// --- 1 ----------------------------------------------------------------

fn random_network(rng: &mut ChaCha8Rng) -> FlowNetwork {
    let n = rng.random_range(1..=12);
    let mut net = FlowNetwork::new(n);
    let arcs = rng.random_range(0..=3 * n + 4);
    let vertex = |i: usize| match i {
        i if i == n => Vertex::Source,
        i if i == n + 1 => Vertex::Sink,
        i => Vertex::Node(i),
    };
    let mut added = 0;
    while added < arcs {
        let (from, to) = (vertex(rng.random_range(0..n + 2)), vertex(rng.random_range(0..n + 2)));
        let cap = if rng.random_bool(0.3) {
            Capacity::INFINITE
        } else {
            Capacity::finite(rng.random_range(0..=10) as f64).unwrap()
        };
        if net.add_arc(from, to, cap).is_ok() {
            added += 1;
        }
    }
    net
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    let (mut feasible, mut infeasible, mut failures) = (0, 0, 0);
    for _ in 0..400 {
        let net = random_network(&mut rng);
        match (max_flow(&net), brute_force_min_cut(&net)) {
            (Ok(labels), Ok((value, _))) => {
                feasible += 1;
                let cut = net.cut_capacity(labels.sides()).value();
                if labels.flow_value() != value || cut != Some(labels.flow_value()) {
                    failures += 1;
                }
            }
            (Err(Error::InfeasibleCut), Err(Error::InfeasibleCut)) => infeasible += 1,
            _ => failures += 1,
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures == 0 && feasible >= 200 && secs < 10.0,
        format!(
            "{feasible} feasible + {infeasible} infeasible networks, {failures} mismatches (exact), {secs:.2} s (limit 10 s)"
        ),
    )
}

// --- 2 ----------------------------------------------------------------

fn criterion_2(ledger: &mut Ledger) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
    let template = Template::circle(14.0).unwrap();
    let (mut trials, mut failures, mut equal_vectors) = (0, 0, 0);
    for rays in [3, 4] {
        for nodes in [3, 4, 5] {
            for delta in [0, 1, 2] {
                for _ in 0..20 {
                    let values: Vec<f64> = (0..20 * 20).map(|_| rng.random_range(0.0..255.0)).collect();
                    let grid = ScalarGrid::with_unit_spacing(vec![20, 20], values).unwrap();
                    let seed = Point::xy(rng.random_range(8.0..11.0), rng.random_range(8.0..11.0));
                    let cfg = BuildConfig {
                        delta,
                        rays,
                        nodes_per_ray: nodes,
                        mean_radius_mm: 2.5,
                        ..Default::default()
                    };
                    let req = SegmentationRequest::new(template.clone(), seed, cfg.clone());
                    let res = ledger.segment(&grid, &req).unwrap();
                    let geom = generate_rays(&template, seed, rays, nodes).unwrap();
                    let mu = estimate_mean(&grid, seed, &[], &cfg).unwrap();
                    let cost = CostField::sample(&grid, &geom, mu);
                    let (best_vec, best) = brute_force_boundary(&geom, &cost, &cfg).unwrap();
                    trials += 1;
                    if boundary_cost(&cost, &res.boundary) != best {
                        failures += 1;
                    }
                    equal_vectors += usize::from(best_vec == res.boundary);
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures == 0 && secs < 30.0,
        format!(
            "{trials} trials over R{{3,4}} x N{{3,4,5}} x delta{{0,1,2}}, {failures} cost mismatches (exact), \
             {equal_vectors} identical vectors, {secs:.2} s (limit 30 s)"
        ),
    )
}

// --- 3 ----------------------------------------------------------------

fn criterion_3(ledger: &Ledger) -> Outcome {
    let mut violations = 0;
    let mut checked = 0;
    for (grid, req, res) in &ledger.runs {
        checked += 1;
        let cfg = &req.config;
        let geom = generate_rays_with_layout(
            &req.template,
            req.primary_seed,
            req.layout().unwrap(),
            cfg.rays,
            cfg.nodes_per_ray,
        )
        .unwrap();
        let mu = estimate_mean(grid, geom.seed(), &req.refinement_seeds, cfg).unwrap();
        let (mut net, map) = assemble_network(&geom, &CostField::sample(grid, &geom, mu), cfg).unwrap();
        for seed in &req.refinement_seeds {
            let mut seed = seed.clone();
            seed.resnap(&geom);
            net = apply_refinement(&net, &map, &seed, &geom).unwrap();
        }
        let labels = max_flow(&net).unwrap();
        for r in 0..geom.ray_count() {
            let b = res.boundary[r];
            for k in 0..geom.nodes_per_ray() {
                if labels.is_source_side(map.id(NodeIndex::new(r, k))) != (k <= b) {
                    violations += 1;
                }
            }
        }
        if extract_boundary(&labels, &geom, &map) != res.boundary {
            violations += 1;
        }
        for &(a, b) in geom.adjacency() {
            if res.boundary[a].abs_diff(res.boundary[b]) > cfg.delta {
                violations += 1;
            }
        }
        for (seed, node) in req.refinement_seeds.iter().zip(&res.snapped_refinements) {
            if *node != geom.closest_node(seed.position) || res.boundary[node.ray] != node.depth {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0 && checked > 0,
        format!(
            "{checked} segmentations re-checked (prefix labels, smoothness, forcing), {violations} violations (exact)"
        ),
    )
}

// --- 4 ----------------------------------------------------------------

fn disc_request(seed: Point) -> SegmentationRequest {
    SegmentationRequest::new(Template::circle(60.0).unwrap(), seed, BuildConfig::default())
}

fn wedge_phantom() -> (ScalarGrid, Mask) {
    let (grid, truth) = make_phantom(&PhantomSpec::disc(64, 20.0, 200.0, 50.0, 0.0), 0).unwrap();
    let c = Point::xy(31.5, 31.5);
    let mut values = grid.values().to_vec();
    for y in 0..64 {
        for x in 0..64 {
            let d = Point::xy(x as f64, y as f64) - c;
            let angle = d.y.atan2(d.x);
            if angle.abs() <= PI / 3.0 && d.norm() >= 8.0 && d.norm() <= 20.0 {
                values[y * 64 + x] = 400.0;
            }
        }
    }
    let grid = ScalarGrid::new(vec![64, 64], vec![1.0, 1.0], vec![0.0, 0.0], values).unwrap();
    (grid, truth)
}

fn criterion_4(ledger: &mut Ledger) -> Outcome {
    let center = Point::xy(31.5, 31.5);
    let (grid, truth) = make_phantom(&PhantomSpec::disc(64, 20.0, 200.0, 50.0, 0.0), 0).unwrap();
    let clean = dice(&ledger.segment(&grid, &disc_request(center)).unwrap().mask, &truth).unwrap();

    // noise sigma at 5% of the 8-bit intensity range
    let sigma = 0.05 * 255.0;
    let (noisy, truth_n) = make_phantom(&PhantomSpec::disc(64, 20.0, 200.0, 50.0, sigma), 42).unwrap();
    let noisy_dsc = dice(&ledger.segment(&noisy, &disc_request(center)).unwrap().mask, &truth_n).unwrap();

    let (sphere, truth_s) = make_phantom(&PhantomSpec::sphere(48, 15.0, 200.0, 50.0, 0.0), 0).unwrap();
    let req = SegmentationRequest::new(
        Template::sphere(44.0).unwrap(),
        Point::new(23.5, 23.5, 23.5),
        BuildConfig {
            rays: 16 * 32,
            lat_rows: Some(16),
            nodes_per_ray: 30,
            ..Default::default()
        },
    );
    let sphere_dsc = dice(&ledger.segment(&sphere, &req).unwrap().mask, &truth_s).unwrap();

    let (wedge, truth_w) = wedge_phantom();
    let single = dice(&ledger.segment(&wedge, &disc_request(center)).unwrap().mask, &truth_w).unwrap();
    let mut refined_req = disc_request(center);
    for (i, deg) in [-40.0f64, 0.0, 40.0].into_iter().enumerate() {
        let a = deg.to_radians();
        let p = center + Point::xy(a.cos(), a.sin()) * 20.0;
        refined_req
            .refinement_seeds
            .push(RefinementSeed::new(format!("s{}", i + 1), p));
    }
    let refined = dice(&ledger.segment(&wedge, &refined_req).unwrap().mask, &truth_w).unwrap();

    let pass = clean >= 0.95 && noisy_dsc >= 0.90 && sphere_dsc >= 0.90 && single < 0.85 && refined - single >= 0.05;
    outcome(
        pass,
        format!(
            "disc {clean:.4} (>= 0.95), noisy disc sigma {sigma:.2} {noisy_dsc:.4} (>= 0.90), \
             sphere 16x32x30 {sphere_dsc:.4} (>= 0.90), wedge single seed {single:.4} (< 0.85) -> \
             3 refinements {refined:.4} (gain {:.4} >= 0.05)",
            refined - single
        ),
    )
}

// --- 5 ----------------------------------------------------------------

fn criterion_5() -> Outcome {
    let spec = PhantomSpec {
        kind: PhantomKind::Rectangle,
        center: Point::xy(49.75, 49.75),
        extent: vec![25.0, 20.0],
        fg_intensity: 200.0,
        bg_intensity: 50.0,
        noise_sigma: 7.5,
        dims: vec![200, 200],
        spacing: vec![0.5, 0.5],
    };
    let (grid, _) = make_phantom(&spec, 7).unwrap();
    let setup = BenchmarkSetup {
        template: Template::rectangle(80.0, 80.0).unwrap(),
        delta: 2,
        mean_radius_mm: 5.0,
        seed_center: spec.center,
        jitter_mm: 1.0,
        repetitions: 10,
        rng_seed: 5,
    };
    let report = run_benchmark(&grid, &setup, &[(30, 30), (300, 30), (300, 300), (30_000, 30)]).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for row in &report.rows {
        if row.meets_budget() == Some(false) || row.repetitions < 10 {
            pass = false;
        }
        parts.push(format!(
            "{} nodes median {:.2} ms (mean {:.2}; budget {}; stretch {} {})",
            row.node_count,
            row.median_total_ms,
            row.mean_total_ms,
            row.budget_ms.map_or("report only".to_string(), |b| format!("{b} ms")),
            row.target_ms.map_or("-".to_string(), |t| format!("{t} ms")),
            if row.meets_target() == Some(true) {
                "met"
            } else {
                "missed"
            },
        ));
    }
    pass &= report.rows.len() == 4;
    println!("{}", report.summary().trim_end());
    outcome(pass, parts.join("; "))
}

// --- 6 ----------------------------------------------------------------

fn criterion_6(ledger: &mut Ledger) -> Outcome {
    let center = Point::xy(31.5, 31.5);
    let (disc, _) = make_phantom(&PhantomSpec::disc(64, 20.0, 200.0, 50.0, 0.0), 0).unwrap();
    let rect_spec = PhantomSpec {
        kind: PhantomKind::Rectangle,
        center,
        extent: vec![18.0, 12.0],
        fg_intensity: 200.0,
        bg_intensity: 50.0,
        noise_sigma: 0.0,
        dims: vec![64, 64],
        spacing: vec![1.0, 1.0],
    };
    let (rect, _) = make_phantom(&rect_spec, 0).unwrap();
    let (sphere, _) = make_phantom(&PhantomSpec::sphere(40, 12.0, 200.0, 50.0, 0.0), 0).unwrap();
    let cases = vec![
        (disc, disc_request(center)),
        (
            rect,
            SegmentationRequest::new(
                Template::rectangle(50.0, 40.0).unwrap(),
                center,
                BuildConfig {
                    rays: 60,
                    ..Default::default()
                },
            ),
        ),
        (
            sphere,
            SegmentationRequest::new(
                Template::sphere(36.0).unwrap(),
                Point::new(19.5, 19.5, 19.5),
                BuildConfig {
                    rays: 8 * 16,
                    lat_rows: Some(8),
                    ..Default::default()
                },
            ),
        ),
    ];
    let mut compared = 0;
    let mut differing = 0;
    for (grid, req) in &cases {
        let base = ledger.segment(grid, req).unwrap().boundary;
        for a in [0.5, 3.0] {
            for b in [-10.0, 100.0] {
                let mapped = grid.map_values(|v| a * v + b).unwrap();
                compared += 1;
                if ledger.segment(&mapped, req).unwrap().boundary != base {
                    differing += 1;
                }
            }
        }
    }
    outcome(
        differing == 0,
        format!("{compared} transformed runs over disc, rectangle and sphere phantoms, {differing} boundary changes (exact)"),
    )
}

// --- 7 ----------------------------------------------------------------

fn criterion_7(ledger: &mut Ledger) -> Outcome {
    let flat2 = ScalarGrid::filled(vec![64, 64], 120.0).unwrap();
    let flat3 = ScalarGrid::filled(vec![32, 32, 32], 120.0).unwrap();
    let mut runs = 0;
    let mut failures = 0;
    let cases = [
        (
            &flat2,
            Template::circle(50.0).unwrap(),
            Point::xy(31.5, 31.5),
            BuildConfig {
                delta: 0,
                ..Default::default()
            },
        ),
        (
            &flat2,
            Template::rectangle(40.0, 30.0).unwrap(),
            Point::xy(30.0, 33.0),
            BuildConfig {
                delta: 0,
                rays: 45,
                nodes_per_ray: 12,
                ..Default::default()
            },
        ),
        (
            &flat3,
            Template::sphere(24.0).unwrap(),
            Point::new(15.5, 15.5, 15.5),
            BuildConfig {
                delta: 0,
                rays: 6 * 12,
                lat_rows: Some(6),
                nodes_per_ray: 10,
                ..Default::default()
            },
        ),
    ];
    for (grid, template, seed, cfg) in cases {
        let base = SegmentationRequest::new(template, seed, cfg.clone());
        let geom = generate_rays_with_layout(
            &base.template,
            seed,
            base.layout().unwrap(),
            cfg.rays,
            cfg.nodes_per_ray,
        )
        .unwrap();
        for (r, k) in [
            (0, 0),
            (1, 3),
            (cfg.rays / 2, cfg.nodes_per_ray - 1),
            (cfg.rays - 1, cfg.nodes_per_ray / 2),
        ] {
            let req = base
                .clone()
                .with_refinement(RefinementSeed::new("r", geom.position(NodeIndex::new(r, k))));
            let res = ledger.segment(grid, &req).unwrap();
            runs += 1;
            if res.boundary.iter().any(|&b| b != k) {
                failures += 1;
            }
        }
    }
    outcome(
        failures == 0,
        format!("{runs} constant-image runs (2D and 3D), {failures} with a non-uniform boundary (exact)"),
    )
}

// --- 8 ----------------------------------------------------------------

fn criterion_8(ledger: &mut Ledger) -> Outcome {
    let (grid, _) = make_phantom(&PhantomSpec::disc(128, 40.0, 200.0, 50.0, 8.0), 3).unwrap();
    let store = SessionStore::default();
    let session = store
        .create(
            grid.clone(),
            Template::circle(110.0).unwrap(),
            BuildConfig {
                rays: 300,
                nodes_per_ray: 60,
                ..Default::default()
            },
        )
        .unwrap();
    session.set_primary(Point::xy(63.5, 63.5)).unwrap();
    session.add_refinement(Point::xy(63.5, 103.0)).unwrap();
    if !session.wait_settled(Duration::from_secs(30)) {
        return outcome(false, "initial state never settled".into());
    }
    let before = session.recompute_count();
    let start = Instant::now();
    let burst = 10u64;
    for i in 0..burst {
        let p = Point::xy(55.0 + i as f64, 60.0 + 0.5 * i as f64);
        session.move_seed(PRIMARY_SEED_ID, p).unwrap();
        std::thread::sleep(Duration::from_millis(10));
    }
    let burst_ms = start.elapsed().as_secs_f64() * 1e3;
    if !session.wait_settled(Duration::from_secs(30)) {
        return outcome(false, "burst never settled".into());
    }
    let recomputes = session.recompute_count() - before;
    let view = session.result();
    let published = view.result.expect("settled result");
    let direct = ledger.segment(&grid, &session.current_request().unwrap()).unwrap();
    let identical = published.eq_ignoring_timing(&direct);
    let pass = identical && !view.stale && view.revision == session.revision() && recomputes <= burst + 1;
    outcome(
        pass,
        format!(
            "burst of {burst} moves in {burst_ms:.0} ms, {recomputes} recomputes (<= {}), settled at revision {}, \
             identical to direct segment(): {identical}",
            burst + 1,
            view.revision
        ),
    )
}

fn main() -> ExitCode {
    let mut ledger = Ledger::default();
    let mut failed = 0;
    let mut report = |n: usize, name: &str, o: Outcome| {
        println!(
            "[{}] criterion {n} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    };
    report(1, "solver correctness", criterion_1());
    report(2, "lattice optimality", criterion_2(&mut ledger));
    report(4, "phantom accuracy", criterion_4(&mut ledger));
    report(6, "affine invariance", criterion_6(&mut ledger));
    report(7, "zero-delta collapse", criterion_7(&mut ledger));
    report(8, "service convergence", criterion_8(&mut ledger));
    report(3, "structural invariants", criterion_3(&ledger));
    report(5, "latency", criterion_5());
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
