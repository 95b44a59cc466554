//! Ground-truth comparison, exhaustive oracles and the latency benchmark.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cutbuilder::{BuildConfig, CostField};
use crate::error::{Error, Result};
use crate::flownet::{FlowNetwork, Side, Vertex};
use crate::geom::Point;
use crate::imaging::{Mask, ScalarGrid};
use crate::segmenter::{segment, SegmentationRequest, Timing};
use crate::templates::{RayGeometry, Template};

/// Dice similarity `2|A n B| / (|A| + |B|)`; two empty masks score 1.
pub fn dice(a: &Mask, b: &Mask) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::validation(format!(
            "mask dims differ: {:?} vs {:?}",
            a.dims(),
            b.dims()
        )));
    }
    let (mut both, mut na, mut nb) = (0usize, 0usize, 0usize);
    for (&x, &y) in a.labels().iter().zip(b.labels()) {
        na += x as usize;
        nb += y as usize;
        both += (x && y) as usize;
    }
    if na + nb == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * both as f64 / (na + nb) as f64)
}

pub const BRUTE_FORCE_MAX_NODES: usize = 20;

/// Exact minimum cut by enumerating every SOURCE/SINK assignment of the
/// regular nodes. Partitions that cut an infinite arc are skipped; if none
/// remain the result is [`Error::InfeasibleCut`].
pub fn brute_force_min_cut(net: &FlowNetwork) -> Result<(f64, Vec<Side>)> {
    let n = net.node_count();
    if n > BRUTE_FORCE_MAX_NODES {
        return Err(Error::validation(format!(
            "brute force supports at most {BRUTE_FORCE_MAX_NODES} nodes, got {n}"
        )));
    }
    let on_source = |v: Vertex, bits: u32| match v {
        Vertex::Source => true,
        Vertex::Sink => false,
        Vertex::Node(i) => bits >> i & 1 == 1,
    };
    let mut best: Option<(f64, u32)> = None;
    'partitions: for bits in 0u32..(1u32 << n) {
        let mut total = 0.0;
        for arc in net.arcs() {
            if on_source(arc.from, bits) && !on_source(arc.to, bits) {
                match arc.cap.value() {
                    Some(c) => total += c,
                    None => continue 'partitions,
                }
            }
        }
        if best.is_none_or(|(v, _)| total < v) {
            best = Some((total, bits));
        }
    }
    let (value, bits) = best.ok_or(Error::InfeasibleCut)?;
    let sides = (0..n)
        .map(|i| if bits >> i & 1 == 1 { Side::Source } else { Side::Sink })
        .collect();
    Ok((value, sides))
}

/// Terminal cost of one boundary vector: on each ray, the positive forward
/// cost differences at depths `1..=b` plus the negated negative ones beyond `b`.
pub fn boundary_cost(cost: &CostField, boundary: &[usize]) -> f64 {
    boundary
        .iter()
        .enumerate()
        .map(|(r, &b)| {
            let c = cost.ray_costs(r);
            let mut total = 0.0;
            for k in 1..c.len() {
                let w = c[k] - c[k - 1];
                if k <= b {
                    total += w.max(0.0);
                } else {
                    total += (-w).max(0.0);
                }
            }
            total
        })
        .sum()
}

pub const BRUTE_FORCE_MAX_RAYS: usize = 4;
pub const BRUTE_FORCE_MAX_DEPTH: usize = 6;

/// Cheapest delta-feasible boundary vector by exhaustive enumeration in
/// lexicographic order; the first minimum found wins ties.
pub fn brute_force_boundary(geom: &RayGeometry, cost: &CostField, cfg: &BuildConfig) -> Result<(Vec<usize>, f64)> {
    let (rays, n) = (geom.ray_count(), geom.nodes_per_ray());
    if rays > BRUTE_FORCE_MAX_RAYS || n > BRUTE_FORCE_MAX_DEPTH {
        return Err(Error::validation(format!(
            "brute force supports at most {BRUTE_FORCE_MAX_RAYS} rays of {BRUTE_FORCE_MAX_DEPTH} nodes"
        )));
    }
    if cost.ray_count() != rays || cost.nodes_per_ray() != n {
        return Err(Error::validation("cost field and ray geometry differ in size"));
    }
    let mut b = vec![0usize; rays];
    let mut best: Option<(Vec<usize>, f64)> = None;
    loop {
        let feasible = geom.adjacency().iter().all(|&(x, y)| b[x].abs_diff(b[y]) <= cfg.delta);
        if feasible {
            let c = boundary_cost(cost, &b);
            if best.as_ref().is_none_or(|(_, bc)| c < *bc) {
                best = Some((b.clone(), c));
            }
        }
        // odometer with ray 0 most significant
        let mut i = rays;
        loop {
            if i == 0 {
                return best.ok_or_else(|| Error::validation("no feasible boundary vector"));
            }
            i -= 1;
            b[i] += 1;
            if b[i] < n {
                break;
            }
            b[i] = 0;
        }
    }
}

/// Host description stored with every benchmark report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineDescriptor {
    pub os: String,
    pub arch: String,
    pub logical_cpus: usize,
    pub cpu_model: Option<String>,
    pub build_profile: String,
}

impl MachineDescriptor {
    pub fn current() -> Self {
        let cpu_model = std::fs::read_to_string("/proc/cpuinfo").ok().and_then(|text| {
            text.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split(':').nth(1))
                .map(|s| s.trim().to_string())
        });
        Self {
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            logical_cpus: std::thread::available_parallelism().map_or(1, |n| n.get()),
            cpu_model,
            build_profile: if cfg!(debug_assertions) { "debug" } else { "release" }.to_string(),
        }
    }
}

pub const MIN_REPETITIONS: usize = 10;

/// Interactive targets from the reference measurements (`target_ms`) and the
/// pass budget with a x3 hardware tolerance (`budget_ms`), keyed by node count.
pub fn latency_targets(node_count: usize) -> (Option<f64>, Option<f64>) {
    match node_count {
        900 => (Some(30.0), Some(90.0)),
        9_000 => (Some(100.0), Some(300.0)),
        90_000 => (Some(130.0), Some(500.0)),
        900_000 => (Some(1000.0), None),
        _ => (None, None),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub rays: usize,
    pub nodes_per_ray: usize,
    pub node_count: usize,
    pub repetitions: usize,
    pub median_total_ms: f64,
    pub mean_total_ms: f64,
    pub median_phase_ms: Timing,
    pub mean_phase_ms: Timing,
    pub target_ms: Option<f64>,
    pub budget_ms: Option<f64>,
}

impl BenchmarkRow {
    pub fn meets_target(&self) -> Option<bool> {
        self.target_ms.map(|t| self.median_total_ms <= t)
    }

    pub fn meets_budget(&self) -> Option<bool> {
        self.budget_ms.map(|t| self.median_total_ms <= t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub template: Template,
    pub delta: usize,
    pub machine: MachineDescriptor,
    pub rows: Vec<BenchmarkRow>,
}

impl BenchmarkReport {
    /// Comma-separated table, one row per lattice size.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "rays,nodes_per_ray,node_count,repetitions,median_total_ms,mean_total_ms,\
             ray_generation_ms,sampling_ms,assembly_ms,solve_ms,extraction_ms,\
             target_ms,budget_ms,meets_target,meets_budget\n",
        );
        let opt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v}"));
        let flag = |v: Option<bool>| v.map_or(String::new(), |v| v.to_string());
        for r in &self.rows {
            let p = &r.median_phase_ms;
            let _ = writeln!(
                out,
                "{},{},{},{},{:.3},{:.3},{:.3},{:.3},{:.3},{:.3},{:.3},{},{},{},{}",
                r.rays,
                r.nodes_per_ray,
                r.node_count,
                r.repetitions,
                r.median_total_ms,
                r.mean_total_ms,
                p.ray_generation_ms,
                p.sampling_ms,
                p.assembly_ms,
                p.solve_ms,
                p.extraction_ms,
                opt(r.target_ms),
                opt(r.budget_ms),
                flag(r.meets_target()),
                flag(r.meets_budget()),
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Human-readable table.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let m = &self.machine;
        let _ = writeln!(
            out,
            "machine: {} / {} / {} cpus / {} ({})",
            m.os,
            m.arch,
            m.logical_cpus,
            m.cpu_model.as_deref().unwrap_or("unknown cpu"),
            m.build_profile
        );
        let _ = writeln!(
            out,
            "{:>7} {:>5} {:>9} {:>5} {:>10} {:>10} {:>9} {:>9}",
            "rays", "nodes", "total", "reps", "median ms", "mean ms", "target", "budget"
        );
        for r in &self.rows {
            let mark = |limit: Option<f64>, ok: Option<bool>| match (limit, ok) {
                (Some(l), Some(true)) => format!("{l}:ok"),
                (Some(l), _) => format!("{l}:over"),
                _ => "-".to_string(),
            };
            let _ = writeln!(
                out,
                "{:>7} {:>5} {:>9} {:>5} {:>10.2} {:>10.2} {:>9} {:>9}",
                r.rays,
                r.nodes_per_ray,
                r.node_count,
                r.repetitions,
                r.median_total_ms,
                r.mean_total_ms,
                mark(r.target_ms, r.meets_target()),
                mark(r.budget_ms, r.meets_budget()),
            );
        }
        out
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn summarize(timings: &[Timing], pick: fn(&Timing) -> f64) -> (f64, f64) {
    let mut v: Vec<f64> = timings.iter().map(pick).collect();
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (median(&mut v), mean)
}

/// Benchmark settings other than the lattice sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSetup {
    pub template: Template,
    pub delta: usize,
    pub mean_radius_mm: f64,
    /// Seeds are drawn uniformly within `jitter_mm` of this point.
    pub seed_center: Point,
    pub jitter_mm: f64,
    pub repetitions: usize,
    pub rng_seed: u64,
}

/// Times `segment()` for each `(rays, nodes_per_ray)` config, one run after
/// another on a freshly jittered seed each time, after one untimed warm-up.
pub fn run_benchmark(grid: &ScalarGrid, setup: &BenchmarkSetup, configs: &[(usize, usize)]) -> Result<BenchmarkReport> {
    if setup.repetitions < MIN_REPETITIONS {
        return Err(Error::validation(format!(
            "at least {MIN_REPETITIONS} repetitions are required, got {}",
            setup.repetitions
        )));
    }
    if configs.is_empty() {
        return Err(Error::validation("no benchmark configs given"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(setup.rng_seed);
    let mut rows = Vec::with_capacity(configs.len());
    for &(rays, nodes) in configs {
        let cfg = BuildConfig {
            delta: setup.delta,
            rays,
            nodes_per_ray: nodes,
            lat_rows: None,
            mean_radius_mm: setup.mean_radius_mm,
            include_refinement_in_mean: false,
        };
        let mut timings = Vec::with_capacity(setup.repetitions);
        for rep in 0..=setup.repetitions {
            let mut seed = setup.seed_center;
            for a in 0..grid.ndim() {
                let j = if setup.jitter_mm > 0.0 {
                    rng.random_range(-setup.jitter_mm..=setup.jitter_mm)
                } else {
                    0.0
                };
                match a {
                    0 => seed.x += j,
                    1 => seed.y += j,
                    _ => seed.z += j,
                }
            }
            let req = SegmentationRequest::new(setup.template.clone(), seed, cfg.clone());
            let res = segment(grid, &req)?;
            if rep > 0 {
                timings.push(res.timing);
            }
        }
        let phase = |pick: fn(&Timing) -> f64| summarize(&timings, pick);
        let (mt, at) = phase(|t| t.total_ms);
        let (mr, ar) = phase(|t| t.ray_generation_ms);
        let (ms, as_) = phase(|t| t.sampling_ms);
        let (ma, aa) = phase(|t| t.assembly_ms);
        let (mv, av) = phase(|t| t.solve_ms);
        let (me, ae) = phase(|t| t.extraction_ms);
        let (target_ms, budget_ms) = latency_targets(rays * nodes);
        rows.push(BenchmarkRow {
            rays,
            nodes_per_ray: nodes,
            node_count: rays * nodes,
            repetitions: timings.len(),
            median_total_ms: mt,
            mean_total_ms: at,
            median_phase_ms: Timing {
                ray_generation_ms: mr,
                sampling_ms: ms,
                assembly_ms: ma,
                solve_ms: mv,
                extraction_ms: me,
                total_ms: mt,
            },
            mean_phase_ms: Timing {
                ray_generation_ms: ar,
                sampling_ms: as_,
                assembly_ms: aa,
                solve_ms: av,
                extraction_ms: ae,
                total_ms: at,
            },
            target_ms,
            budget_ms,
        });
    }
    Ok(BenchmarkReport {
        template: setup.template.clone(),
        delta: setup.delta,
        machine: MachineDescriptor::current(),
        rows,
    })
}
