//! One full segmentation pass: rays, costs, network, refinement constraints,
//! min-cut, boundary, contour and mask.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cutbuilder::{
    apply_refinement, assemble_network, estimate_mean, BuildConfig, CostField, NodeMap, RefinementSeed,
};
use crate::error::{Error, Result};
use crate::flownet::{max_flow, CutLabels};
use crate::geom::Point;
use crate::imaging::{Mask, ScalarGrid};
use crate::templates::{default_lat_rows, generate_rays_with_layout, NodeIndex, RayGeometry, RayLayout, Template};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationRequest {
    pub template: Template,
    pub primary_seed: Point,
    #[serde(default)]
    pub refinement_seeds: Vec<RefinementSeed>,
    #[serde(default)]
    pub config: BuildConfig,
}

impl SegmentationRequest {
    pub fn new(template: Template, primary_seed: Point, config: BuildConfig) -> Self {
        Self {
            template,
            primary_seed,
            refinement_seeds: Vec::new(),
            config,
        }
    }

    pub fn with_refinement(mut self, seed: RefinementSeed) -> Self {
        self.refinement_seeds.push(seed);
        self
    }

    /// Ray layout implied by the template dimensionality and the config.
    pub fn layout(&self) -> Result<RayLayout> {
        if self.template.ndim() == 2 {
            return Ok(RayLayout::Planar);
        }
        let rows = match self.config.lat_rows {
            Some(rows) => rows,
            None => default_lat_rows(self.config.rays)?,
        };
        if rows == 0 || self.config.rays % rows != 0 {
            return Err(Error::validation(format!(
                "{} rays cannot be split into {rows} latitude rows",
                self.config.rays
            )));
        }
        Ok(RayLayout::LatLong {
            rows,
            cols: self.config.rays / rows,
        })
    }

    fn validate(&self, grid: &ScalarGrid) -> Result<()> {
        self.config.validate()?;
        if self.template.ndim() != grid.ndim() {
            return Err(Error::validation(format!(
                "{}D template cannot segment a {}D image",
                self.template.ndim(),
                grid.ndim()
            )));
        }
        if !self.primary_seed.is_finite() {
            return Err(Error::validation("primary seed must be finite"));
        }
        for (a, (lo, hi)) in grid.world_bounds().into_iter().enumerate() {
            let half = 0.5 * grid.spacing()[a];
            let v = self.primary_seed.axis(a);
            if v < lo - half || v > hi + half {
                return Err(Error::validation(format!(
                    "primary seed {:?} lies outside the image on axis {a}",
                    self.primary_seed
                )));
            }
        }
        let mut ids = std::collections::HashSet::new();
        for s in &self.refinement_seeds {
            if !s.position.is_finite() {
                return Err(Error::validation(format!("refinement seed {} is not finite", s.id)));
            }
            if !ids.insert(s.id.as_str()) {
                return Err(Error::validation(format!("duplicate refinement seed id {}", s.id)));
            }
        }
        Ok(())
    }
}

/// Wall-clock duration of each pipeline phase, milliseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub ray_generation_ms: f64,
    pub sampling_ms: f64,
    pub assembly_ms: f64,
    pub solve_ms: f64,
    pub extraction_ms: f64,
    pub total_ms: f64,
}

/// The segmented outline: a closed polygon in 2D, a closed triangle mesh in 3D.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Contour {
    /// Vertex `r` is the boundary node of ray `r`; the last vertex connects to the first.
    Polygon { vertices: Vec<Point> },
    /// Vertices `0..R` are the boundary nodes in ray order, followed by the
    /// north and south pole points. Triangles wind outward.
    Surface {
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
    },
}

impl Contour {
    pub fn vertices(&self) -> &[Point] {
        match self {
            Contour::Polygon { vertices } | Contour::Surface { vertices, .. } => vertices,
        }
    }

    /// Enclosed area (2D) or surface area (3D), mm^2.
    pub fn area(&self) -> f64 {
        match self {
            Contour::Polygon { vertices } => {
                let n = vertices.len();
                let twice: f64 = (0..n)
                    .map(|i| {
                        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                        a.x * b.y - b.x * a.y
                    })
                    .sum();
                0.5 * twice.abs()
            }
            Contour::Surface { vertices, triangles } => triangles
                .iter()
                .map(|t| {
                    let (a, b, c) = (vertices[t[0]], vertices[t[1]], vertices[t[2]]);
                    0.5 * (b - a).cross(c - a).norm()
                })
                .sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentationResult {
    pub seed: Point,
    pub boundary: Vec<usize>,
    pub contour: Contour,
    #[serde(skip)]
    pub mask: Mask,
    pub flow_value: f64,
    /// Seed-region mean used by the cost model.
    pub mean: f64,
    pub snapped_refinements: Vec<NodeIndex>,
    pub timing: Timing,
}

impl SegmentationResult {
    /// Equality over everything except the timing fields.
    pub fn eq_ignoring_timing(&self, other: &Self) -> bool {
        self.seed == other.seed
            && self.boundary == other.boundary
            && self.contour == other.contour
            && self.mask == other.mask
            && self.flow_value.to_bits() == other.flow_value.to_bits()
            && self.mean.to_bits() == other.mean.to_bits()
            && self.snapped_refinements == other.snapped_refinements
    }

    /// JSON document with boundary, contour vertices (mm), flow value and timings.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

/// Runs the whole pipeline. Refinement seeds are re-snapped against the
/// lattice of this call before they are wired in.
pub fn segment(grid: &ScalarGrid, req: &SegmentationRequest) -> Result<SegmentationResult> {
    req.validate(grid)?;
    let cfg = &req.config;
    let start = Instant::now();

    let geom = generate_rays_with_layout(
        &req.template,
        req.primary_seed,
        req.layout()?,
        cfg.rays,
        cfg.nodes_per_ray,
    )?;
    let t_rays = Instant::now();

    let mu = estimate_mean(grid, geom.seed(), &req.refinement_seeds, cfg)?;
    let cost = CostField::sample(grid, &geom, mu);
    let t_sample = Instant::now();

    let (mut net, map) = assemble_network(&geom, &cost, cfg)?;
    let mut seeds = req.refinement_seeds.clone();
    for seed in &mut seeds {
        seed.resnap(&geom);
        net = apply_refinement(&net, &map, seed, &geom)?;
    }
    let snapped: Vec<NodeIndex> = seeds.iter().map(|s| s.snapped.expect("snapped above")).collect();
    let t_assembly = Instant::now();

    let labels = match max_flow(&net) {
        Ok(labels) => labels,
        Err(Error::InfeasibleCut) if !seeds.is_empty() => {
            let conflicts = refinement_conflicts(&geom, &seeds, cfg.delta);
            return Err(if conflicts.is_empty() {
                Error::InfeasibleCut
            } else {
                Error::ConflictingRefinements { conflicts }
            });
        }
        Err(e) => return Err(e),
    };
    let t_solve = Instant::now();

    let boundary = extract_boundary(&labels, &geom, &map);
    let contour = boundary_to_contour(&boundary, &geom);
    let mask = contour_to_mask(&contour, &geom, grid);
    let t_end = Instant::now();

    let ms = |a: Instant, b: Instant| (b - a).as_secs_f64() * 1e3;
    Ok(SegmentationResult {
        seed: geom.seed(),
        boundary,
        contour,
        mask,
        flow_value: labels.flow_value(),
        mean: mu,
        snapped_refinements: snapped,
        timing: Timing {
            ray_generation_ms: ms(start, t_rays),
            sampling_ms: ms(t_rays, t_sample),
            assembly_ms: ms(t_sample, t_assembly),
            solve_ms: ms(t_assembly, t_solve),
            extraction_ms: ms(t_solve, t_end),
            total_ms: ms(start, t_end),
        },
    })
}

/// Pairs of refinement seeds that cannot hold together: seeds `i`, `j` are
/// compatible iff `|k_i - k_j| <= delta * d(r_i, r_j)` with `d` the hop
/// distance in the ray adjacency graph. Pairwise compatibility is also
/// sufficient, so an empty result means the constraints are satisfiable.
pub fn refinement_conflicts(geom: &RayGeometry, seeds: &[RefinementSeed], delta: usize) -> Vec<(String, String)> {
    let neighbors = geom.neighbors();
    let mut out = Vec::new();
    for (i, a) in seeds.iter().enumerate() {
        let Some(na) = a.snapped else { continue };
        let dist = hop_distances(&neighbors, na.ray);
        for b in &seeds[i + 1..] {
            let Some(nb) = b.snapped else { continue };
            let allowed = dist[nb.ray].map(|d| d.saturating_mul(delta));
            let gap = na.depth.abs_diff(nb.depth);
            if allowed.is_some_and(|allowed| gap > allowed) {
                out.push((a.id.clone(), b.id.clone()));
            }
        }
    }
    out
}

fn hop_distances(neighbors: &[Vec<usize>], from: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; neighbors.len()];
    dist[from] = Some(0);
    let mut queue = VecDeque::from([from]);
    while let Some(r) = queue.pop_front() {
        let d = dist[r].expect("queued rays have a distance");
        for &s in &neighbors[r] {
            if dist[s].is_none() {
                dist[s] = Some(d + 1);
                queue.push_back(s);
            }
        }
    }
    dist
}

/// `b_r` = deepest SOURCE-side node on ray `r` (depth 0 is always SOURCE-side).
pub fn extract_boundary(labels: &CutLabels, geom: &RayGeometry, map: &NodeMap) -> Vec<usize> {
    (0..geom.ray_count())
        .map(|r| {
            (0..geom.nodes_per_ray())
                .rev()
                .find(|&k| labels.is_source_side(map.id(NodeIndex::new(r, k))))
                .unwrap_or(0)
        })
        .collect()
}

/// Polygon through the boundary nodes (2D), or a triangulated lat-long
/// surface with both pole rows fanned to a pole point (3D).
pub fn boundary_to_contour(boundary: &[usize], geom: &RayGeometry) -> Contour {
    let vertices: Vec<Point> = boundary
        .iter()
        .enumerate()
        .map(|(r, &b)| geom.position(NodeIndex::new(r, b)))
        .collect();
    match geom.layout() {
        RayLayout::Planar => Contour::Polygon { vertices },
        RayLayout::LatLong { rows, cols } => {
            let seed = geom.seed();
            let (north_r, south_r) = pole_radii(&vertices, seed, rows, cols);
            let mut vertices = vertices;
            let north = vertices.len();
            vertices.push(seed + Point::new(0.0, 0.0, north_r));
            let south = vertices.len();
            vertices.push(seed - Point::new(0.0, 0.0, south_r));

            let id = |i: usize, j: usize| i * cols + j % cols;
            let mut triangles = Vec::with_capacity(2 * rows * cols);
            for j in 0..cols {
                triangles.push([north, id(0, j), id(0, j + 1)]);
            }
            for i in 0..rows - 1 {
                for j in 0..cols {
                    let (a, b, c, d) = (id(i, j), id(i, j + 1), id(i + 1, j + 1), id(i + 1, j));
                    triangles.push([a, d, c]);
                    triangles.push([a, c, b]);
                }
            }
            for j in 0..cols {
                triangles.push([south, id(rows - 1, j + 1), id(rows - 1, j)]);
            }
            Contour::Surface { vertices, triangles }
        }
    }
}

/// Mean boundary radius of the first and last latitude rows.
fn pole_radii(ray_vertices: &[Point], seed: Point, rows: usize, cols: usize) -> (f64, f64) {
    let mean = |row: usize| {
        ray_vertices[row * cols..(row + 1) * cols]
            .iter()
            .map(|v| v.distance(seed))
            .sum::<f64>()
            / cols as f64
    };
    (mean(0), mean(rows - 1))
}

/// Star-shaped fill about the seed: a voxel center `p` is foreground iff
/// `|p - seed| <= rho(dir(p))`, with `rho` interpolated linearly between the
/// two neighbouring rays (2D) or bilinearly over the lat-long cell (3D,
/// using the pole radius beyond the outermost rows).
pub fn contour_to_mask(contour: &Contour, geom: &RayGeometry, grid: &ScalarGrid) -> Mask {
    let seed = geom.seed();
    let radii: Vec<f64> = contour.vertices()[..geom.ray_count()]
        .iter()
        .map(|v| v.distance(seed))
        .collect();
    let mut mask = Mask::empty(grid.dims().to_vec()).expect("grid dims are valid");
    let rho_max = contour.vertices().iter().map(|v| v.distance(seed)).fold(0.0, f64::max);

    let nd = grid.ndim();
    let mut lo = [0usize; 3];
    let mut hi = [0usize; 3];
    for a in 0..nd {
        let dim = grid.dims()[a];
        let l = grid.continuous_index(seed, a) - rho_max / grid.spacing()[a];
        let h = grid.continuous_index(seed, a) + rho_max / grid.spacing()[a];
        if h < 0.0 || l > (dim - 1) as f64 {
            return mask;
        }
        lo[a] = l.ceil().max(0.0) as usize;
        hi[a] = (h.floor() as usize).min(dim - 1);
    }

    let radius_toward: Box<dyn Fn(Point) -> f64> = match geom.layout() {
        RayLayout::Planar => {
            let rays = radii.len();
            Box::new(move |v: Point| {
                let f = v.y.atan2(v.x).rem_euclid(2.0 * PI) / (2.0 * PI) * rays as f64;
                let fl = f.floor();
                let t = f - fl;
                let r0 = (fl as usize) % rays;
                let r1 = (r0 + 1) % rays;
                radii[r0] * (1.0 - t) + radii[r1] * t
            })
        }
        RayLayout::LatLong { rows, cols } => {
            let (north, south) = pole_radii(&contour.vertices()[..geom.ray_count()], seed, rows, cols);
            Box::new(move |v: Point| {
                let d = v.norm();
                let theta = (v.z / d).clamp(-1.0, 1.0).acos();
                let phi = v.y.atan2(v.x).rem_euclid(2.0 * PI);
                let w = phi / (2.0 * PI) * cols as f64;
                let wf = w.floor();
                let tw = w - wf;
                let j0 = (wf as usize) % cols;
                let j1 = (j0 + 1) % cols;
                let row = |i: usize| radii[i * cols + j0] * (1.0 - tw) + radii[i * cols + j1] * tw;
                let u = theta / PI * rows as f64 - 0.5;
                if u <= 0.0 {
                    let t = (u + 0.5) / 0.5;
                    north * (1.0 - t) + row(0) * t
                } else if u >= (rows - 1) as f64 {
                    let t = (u - (rows - 1) as f64) / 0.5;
                    row(rows - 1) * (1.0 - t) + south * t
                } else {
                    let uf = u.floor();
                    let tu = u - uf;
                    let i0 = uf as usize;
                    row(i0) * (1.0 - tu) + row(i0 + 1) * tu
                }
            })
        }
    };

    let zr = if nd == 3 { lo[2]..=hi[2] } else { 0..=0 };
    for z in zr {
        for y in lo[1]..=hi[1] {
            for x in lo[0]..=hi[0] {
                let v = grid.voxel_center([x, y, z]) - seed;
                let d = v.norm();
                if d == 0.0 || d <= radius_toward(v) {
                    mask.set([x, y, z], true);
                }
            }
        }
    }
    mask
}
