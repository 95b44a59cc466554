//! Template shapes and the ray/node lattice sent out from the primary seed.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point;

/// Fraction of the boundary distance at which depth 0 sits.
pub const INNER_OFFSET_FRACTION: f64 = 0.02;

/// Upper bound on lattice size accepted by [`generate_rays`].
pub const MAX_LATTICE_NODES: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TemplateKind {
    Circle,
    Rectangle,
    Triangle,
    Polygon,
    Sphere,
    Cube,
}

impl TemplateKind {
    pub fn ndim(self) -> usize {
        match self {
            TemplateKind::Sphere | TemplateKind::Cube => 3,
            _ => 2,
        }
    }
}

/// Serialized template description.
///
/// ```json
/// {"kind": "circle", "diameter": 80}
/// {"kind": "rectangle", "extent": [40, 60]}
/// {"kind": "triangle", "corners": [[0, 30], [-25, -15], [25, -15]]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateDesc {
    pub kind: TemplateKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diameter: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extent: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corners: Option<Vec<[f64; 2]>>,
}

/// A template shape centered on the primary seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TemplateDesc", into = "TemplateDesc")]
pub struct Template {
    kind: TemplateKind,
    /// circle/sphere: `[diameter]`; rectangle/cube: full extent per axis;
    /// polygonal kinds: empty
    size: Vec<f64>,
    /// Corner offsets from the center. Polygon corners are recentered on
    /// their vertex centroid.
    corners: Vec<Point>,
}

impl TryFrom<TemplateDesc> for Template {
    type Error = Error;
    fn try_from(d: TemplateDesc) -> Result<Self> {
        make_template(&d)
    }
}

impl From<Template> for TemplateDesc {
    fn from(t: Template) -> Self {
        let mut d = TemplateDesc {
            kind: t.kind,
            diameter: None,
            extent: None,
            corners: None,
        };
        match t.kind {
            TemplateKind::Circle | TemplateKind::Sphere => d.diameter = Some(t.size[0]),
            TemplateKind::Rectangle | TemplateKind::Cube => d.extent = Some(t.size),
            TemplateKind::Triangle | TemplateKind::Polygon => {
                d.corners = Some(t.corners.iter().map(|c| [c.x, c.y]).collect())
            }
        }
        d
    }
}

fn positive(v: f64, what: &str) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::validation(format!("{what} must be positive, got {v}")))
    }
}

/// Builds a template from its description, validating the size parameters.
pub fn make_template(desc: &TemplateDesc) -> Result<Template> {
    let need_diameter = || {
        desc.diameter
            .ok_or_else(|| Error::validation(format!("{:?} template needs a diameter", desc.kind)))
    };
    let need_extent = |n: usize| -> Result<Vec<f64>> {
        let e = desc
            .extent
            .clone()
            .ok_or_else(|| Error::validation(format!("{:?} template needs an extent", desc.kind)))?;
        if e.len() != n {
            return Err(Error::validation(format!(
                "{:?} template needs {n} extents, got {}",
                desc.kind,
                e.len()
            )));
        }
        e.iter().map(|&v| positive(v, "template extent")).collect()
    };
    match desc.kind {
        TemplateKind::Circle | TemplateKind::Sphere => {
            let d = positive(need_diameter()?, "template diameter")?;
            Ok(Template {
                kind: desc.kind,
                size: vec![d],
                corners: Vec::new(),
            })
        }
        TemplateKind::Rectangle => {
            let e = need_extent(2)?;
            let (hx, hy) = (e[0] / 2.0, e[1] / 2.0);
            Ok(Template {
                kind: desc.kind,
                corners: vec![
                    Point::xy(-hx, -hy),
                    Point::xy(hx, -hy),
                    Point::xy(hx, hy),
                    Point::xy(-hx, hy),
                ],
                size: e,
            })
        }
        TemplateKind::Cube => {
            let e = need_extent(3)?;
            let h = [e[0] / 2.0, e[1] / 2.0, e[2] / 2.0];
            let corners = (0..8)
                .map(|i| {
                    let s = |bit: usize| if i >> bit & 1 == 1 { 1.0 } else { -1.0 };
                    Point::new(s(0) * h[0], s(1) * h[1], s(2) * h[2])
                })
                .collect();
            Ok(Template {
                kind: desc.kind,
                size: e,
                corners,
            })
        }
        TemplateKind::Triangle | TemplateKind::Polygon => {
            let raw = desc
                .corners
                .as_ref()
                .ok_or_else(|| Error::validation(format!("{:?} template needs corners", desc.kind)))?;
            if desc.kind == TemplateKind::Triangle && raw.len() != 3 {
                return Err(Error::validation("triangle template needs exactly 3 corners"));
            }
            if raw.len() < 3 {
                return Err(Error::validation("polygon template needs at least 3 corners"));
            }
            if raw.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::validation("polygon corners must be finite"));
            }
            let n = raw.len() as f64;
            let cx = raw.iter().map(|c| c[0]).sum::<f64>() / n;
            let cy = raw.iter().map(|c| c[1]).sum::<f64>() / n;
            let corners: Vec<Point> = raw.iter().map(|c| Point::xy(c[0] - cx, c[1] - cy)).collect();
            check_star_shaped(&corners)?;
            Ok(Template {
                kind: desc.kind,
                size: Vec::new(),
                corners,
            })
        }
    }
}

/// A loop is simple and star-shaped about the origin iff consecutive corners
/// turn strictly in one direction around it and wind exactly once.
fn check_star_shaped(corners: &[Point]) -> Result<()> {
    let n = corners.len();
    let mut sign = 0.0f64;
    let mut winding = 0.0;
    for i in 0..n {
        let (a, b) = (corners[i], corners[(i + 1) % n]);
        let cross = a.x * b.y - a.y * b.x;
        if cross == 0.0 || (sign != 0.0 && cross.signum() != sign) {
            return Err(Error::validation(
                "polygon template must be simple and star-shaped about its center",
            ));
        }
        sign = cross.signum();
        winding += cross.atan2(a.x * b.x + a.y * b.y);
    }
    if (winding.abs() - 2.0 * PI).abs() > 1e-6 {
        return Err(Error::validation(
            "polygon template must be simple and star-shaped about its center",
        ));
    }
    Ok(())
}

impl Template {
    pub fn circle(diameter: f64) -> Result<Self> {
        make_template(&TemplateDesc {
            kind: TemplateKind::Circle,
            diameter: Some(diameter),
            extent: None,
            corners: None,
        })
    }

    pub fn sphere(diameter: f64) -> Result<Self> {
        make_template(&TemplateDesc {
            kind: TemplateKind::Sphere,
            diameter: Some(diameter),
            extent: None,
            corners: None,
        })
    }

    pub fn rectangle(width: f64, height: f64) -> Result<Self> {
        make_template(&TemplateDesc {
            kind: TemplateKind::Rectangle,
            diameter: None,
            extent: Some(vec![width, height]),
            corners: None,
        })
    }

    pub fn cube(x: f64, y: f64, z: f64) -> Result<Self> {
        make_template(&TemplateDesc {
            kind: TemplateKind::Cube,
            diameter: None,
            extent: Some(vec![x, y, z]),
            corners: None,
        })
    }

    pub fn polygon(corners: &[[f64; 2]]) -> Result<Self> {
        let kind = if corners.len() == 3 {
            TemplateKind::Triangle
        } else {
            TemplateKind::Polygon
        };
        make_template(&TemplateDesc {
            kind,
            diameter: None,
            extent: None,
            corners: Some(corners.to_vec()),
        })
    }

    /// Parses either a path to a JSON template document or a shorthand:
    /// `circle:80`, `sphere:80`, `square:80`, `rectangle:40x60`, `cube:80`,
    /// `cube:40x40x60`, `triangle:0,30;-25,-15;25,-15`, `polygon:x,y;x,y;...`.
    pub fn parse(spec: &str) -> Result<Self> {
        let path = Path::new(spec);
        if path.is_file() {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let desc: TemplateDesc =
                serde_json::from_str(&text).map_err(|e| Error::validation(format!("template document: {e}")))?;
            return make_template(&desc);
        }
        let (kind, params) = spec
            .split_once(':')
            .ok_or_else(|| Error::validation(format!("cannot parse template '{spec}'")))?;
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::validation(format!("bad number '{s}' in template")))
        };
        let dims = |s: &str| -> Result<Vec<f64>> { s.split('x').map(num).collect() };
        match kind {
            "circle" => Template::circle(num(params)?),
            "sphere" => Template::sphere(num(params)?),
            "square" => {
                let s = num(params)?;
                Template::rectangle(s, s)
            }
            "rectangle" => match dims(params)?.as_slice() {
                [w, h] => Template::rectangle(*w, *h),
                _ => Err(Error::validation("rectangle needs WxH")),
            },
            "cube" => match dims(params)?.as_slice() {
                [s] => Template::cube(*s, *s, *s),
                [x, y, z] => Template::cube(*x, *y, *z),
                _ => Err(Error::validation("cube needs S or XxYxZ")),
            },
            "triangle" | "polygon" => {
                let corners = params
                    .split(';')
                    .map(|pair| match pair.split(',').map(num).collect::<Result<Vec<_>>>()?[..] {
                        [x, y] => Ok([x, y]),
                        _ => Err(Error::validation(format!("bad corner '{pair}'"))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                if kind == "triangle" && corners.len() != 3 {
                    return Err(Error::validation("triangle template needs exactly 3 corners"));
                }
                Template::polygon(&corners)
            }
            other => Err(Error::validation(format!("unknown template kind '{other}'"))),
        }
    }

    pub fn kind(&self) -> TemplateKind {
        self.kind
    }

    pub fn ndim(&self) -> usize {
        self.kind.ndim()
    }

    pub fn radius(&self) -> Option<f64> {
        match self.kind {
            TemplateKind::Circle | TemplateKind::Sphere => Some(self.size[0] / 2.0),
            _ => None,
        }
    }

    /// Corner offsets from the template center; empty for circle and sphere.
    pub fn corner_points(&self) -> &[Point] {
        &self.corners
    }

    /// Same shape scaled by `factor` about its center.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        positive(factor, "scale factor")?;
        Ok(Template {
            kind: self.kind,
            size: self.size.iter().map(|s| s * factor).collect(),
            corners: self.corners.iter().map(|&c| c * factor).collect(),
        })
    }

    /// Distance from the center to the template boundary along a unit direction.
    pub fn boundary_distance(&self, dir: Point) -> f64 {
        match self.kind {
            TemplateKind::Circle | TemplateKind::Sphere => self.size[0] / 2.0,
            TemplateKind::Rectangle | TemplateKind::Cube => self
                .size
                .iter()
                .enumerate()
                .filter(|&(a, _)| dir.axis(a).abs() > 1e-12)
                .map(|(a, &e)| e / 2.0 / dir.axis(a).abs())
                .fold(f64::INFINITY, f64::min),
            TemplateKind::Triangle | TemplateKind::Polygon => {
                let cross = |u: Point, v: Point| u.x * v.y - u.y * v.x;
                let n = self.corners.len();
                let mut best = f64::INFINITY;
                for i in 0..n {
                    let a = self.corners[i];
                    let e = self.corners[(i + 1) % n] - a;
                    let denom = cross(dir, e);
                    if denom.abs() < 1e-15 {
                        continue;
                    }
                    let t = cross(a, e) / denom;
                    let s = cross(a, dir) / denom;
                    if t > 0.0 && (-1e-9..=1.0 + 1e-9).contains(&s) {
                        best = best.min(t);
                    }
                }
                if best.is_finite() {
                    best
                } else {
                    0.0
                }
            }
        }
    }
}

/// Identifies one lattice node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeIndex {
    pub ray: usize,
    pub depth: usize,
}

impl NodeIndex {
    pub fn new(ray: usize, depth: usize) -> Self {
        Self { ray, depth }
    }
}

/// How ray directions are laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RayLayout {
    /// 2D: uniform angles `2*pi*r/R`, cyclic adjacency.
    Planar,
    /// 3D: latitude-longitude grid, ray `r = row * cols + col`, row 0 next to +z.
    LatLong { rows: usize, cols: usize },
}

/// The sampled node lattice for one seed position.
#[derive(Debug, Clone, PartialEq)]
pub struct RayGeometry {
    seed: Point,
    ray_count: usize,
    nodes_per_ray: usize,
    layout: RayLayout,
    ray_dirs: Vec<Point>,
    boundary_dist: Vec<f64>,
    /// `positions[r * N + k]`
    positions: Vec<Point>,
    adjacency: Vec<(usize, usize)>,
    template: Template,
}

/// Default latitude rows for `rays` total rays: about half as many rows as
/// columns. Fails when that does not divide `rays` evenly.
pub fn default_lat_rows(rays: usize) -> Result<usize> {
    let rows = ((rays as f64 / 2.0).sqrt().round() as usize).max(2);
    if rays % rows != 0 {
        return Err(Error::validation(format!(
            "cannot split {rays} rays into a latitude-longitude grid; give the row count explicitly"
        )));
    }
    Ok(rows)
}

/// Sends `rays` rays with `nodes` nodes each from `seed`. 3D templates use a
/// latitude-longitude layout chosen by [`default_lat_rows`].
pub fn generate_rays(template: &Template, seed: Point, rays: usize, nodes: usize) -> Result<RayGeometry> {
    let layout = if template.ndim() == 3 {
        let rows = default_lat_rows(rays)?;
        RayLayout::LatLong {
            rows,
            cols: rays / rows,
        }
    } else {
        RayLayout::Planar
    };
    generate_rays_with_layout(template, seed, layout, rays, nodes)
}

pub fn generate_rays_with_layout(
    template: &Template,
    seed: Point,
    layout: RayLayout,
    rays: usize,
    nodes: usize,
) -> Result<RayGeometry> {
    if rays < 3 {
        return Err(Error::validation(format!("need at least 3 rays, got {rays}")));
    }
    if nodes < 2 {
        return Err(Error::validation(format!("need at least 2 nodes per ray, got {nodes}")));
    }
    if rays.saturating_mul(nodes) > MAX_LATTICE_NODES {
        return Err(Error::validation(format!(
            "lattice of {rays}x{nodes} nodes exceeds the limit of {MAX_LATTICE_NODES}"
        )));
    }
    if !seed.is_finite() {
        return Err(Error::validation("seed must be finite"));
    }
    let (ray_dirs, adjacency) = match (template.ndim(), layout) {
        (2, RayLayout::Planar) => planar_rays(rays),
        (3, RayLayout::LatLong { rows, cols }) => {
            if rows < 2 || cols < 3 || rows * cols != rays {
                return Err(Error::validation(format!(
                    "latitude-longitude layout {rows}x{cols} does not match {rays} rays \
                     (need rows >= 2, cols >= 3)"
                )));
            }
            latlong_rays(rows, cols)
        }
        (nd, l) => {
            return Err(Error::validation(format!(
                "{:?} template ({nd}D) cannot use ray layout {l:?}",
                template.kind
            )))
        }
    };
    let seed = if template.ndim() == 2 {
        Point::xy(seed.x, seed.y)
    } else {
        seed
    };
    let mut boundary_dist = Vec::with_capacity(rays);
    let mut positions = Vec::with_capacity(rays * nodes);
    for (r, &dir) in ray_dirs.iter().enumerate() {
        let dist = template.boundary_distance(dir);
        if !(dist > 0.0 && dist.is_finite()) {
            return Err(Error::validation(format!(
                "template boundary distance along ray {r} is not positive"
            )));
        }
        boundary_dist.push(dist);
        let t0 = INNER_OFFSET_FRACTION * dist;
        let step = (dist - t0) / (nodes - 1) as f64;
        for k in 0..nodes {
            let t = if k == nodes - 1 { dist } else { t0 + k as f64 * step };
            positions.push(seed + dir * t);
        }
    }
    Ok(RayGeometry {
        seed,
        ray_count: rays,
        nodes_per_ray: nodes,
        layout,
        ray_dirs,
        boundary_dist,
        positions,
        adjacency,
        template: template.clone(),
    })
}

fn planar_rays(rays: usize) -> (Vec<Point>, Vec<(usize, usize)>) {
    let dirs = (0..rays)
        .map(|r| {
            let a = 2.0 * PI * r as f64 / rays as f64;
            Point::xy(a.cos(), a.sin())
        })
        .collect();
    let mut adj: Vec<(usize, usize)> = (0..rays)
        .map(|r| {
            let s = (r + 1) % rays;
            (r.min(s), r.max(s))
        })
        .collect();
    adj.sort_unstable();
    (dirs, adj)
}

/// Polar angle of latitude row `i` (row 0 nearest +z).
pub fn latitude_angle(i: usize, rows: usize) -> f64 {
    PI * (i as f64 + 0.5) / rows as f64
}

fn latlong_rays(rows: usize, cols: usize) -> (Vec<Point>, Vec<(usize, usize)>) {
    let mut dirs = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        let theta = latitude_angle(i, rows);
        for j in 0..cols {
            let phi = 2.0 * PI * j as f64 / cols as f64;
            dirs.push(Point::new(
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            ));
        }
    }
    let id = |i: usize, j: usize| i * cols + j;
    let mut adj = BTreeSet::new();
    let mut link = |a: usize, b: usize| {
        adj.insert((a.min(b), a.max(b)));
    };
    for i in 0..rows {
        for j in 0..cols {
            link(id(i, j), id(i, (j + 1) % cols));
            if i + 1 < rows {
                link(id(i, j), id(i + 1, j));
            }
        }
    }
    // pole rows: every pair is linked through the pole
    for row in [0, rows - 1] {
        for a in 0..cols {
            for b in a + 1..cols {
                link(id(row, a), id(row, b));
            }
        }
    }
    (dirs, adj.into_iter().collect())
}

impl RayGeometry {
    pub fn seed(&self) -> Point {
        self.seed
    }

    pub fn ray_count(&self) -> usize {
        self.ray_count
    }

    pub fn nodes_per_ray(&self) -> usize {
        self.nodes_per_ray
    }

    pub fn node_count(&self) -> usize {
        self.ray_count * self.nodes_per_ray
    }

    pub fn layout(&self) -> RayLayout {
        self.layout
    }

    pub fn ndim(&self) -> usize {
        self.template.ndim()
    }

    pub fn template(&self) -> &Template {
        &self.template
    }

    pub fn ray_dir(&self, r: usize) -> Point {
        self.ray_dirs[r]
    }

    pub fn boundary_distance(&self, r: usize) -> f64 {
        self.boundary_dist[r]
    }

    pub fn position(&self, node: NodeIndex) -> Point {
        self.positions[node.ray * self.nodes_per_ray + node.depth]
    }

    /// Positions of one ray, depth 0 first.
    pub fn ray_positions(&self, r: usize) -> &[Point] {
        &self.positions[r * self.nodes_per_ray..(r + 1) * self.nodes_per_ray]
    }

    /// Distance from the seed of the node at `depth` on ray `r`.
    pub fn node_distance(&self, r: usize, depth: usize) -> f64 {
        let dist = self.boundary_dist[r];
        let n = self.nodes_per_ray;
        if depth == n - 1 {
            return dist;
        }
        let t0 = INNER_OFFSET_FRACTION * dist;
        t0 + depth as f64 * (dist - t0) / (n - 1) as f64
    }

    /// Unordered adjacent ray pairs `(a, b)` with `a < b`, sorted.
    pub fn adjacency(&self) -> &[(usize, usize)] {
        &self.adjacency
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.ray_count];
        for &(a, b) in &self.adjacency {
            out[a].push(b);
            out[b].push(a);
        }
        out
    }

    /// Template corners placed at the seed (the template center).
    pub fn corner_positions(&self) -> Vec<Point> {
        self.template.corner_points().iter().map(|&c| self.seed + c).collect()
    }

    /// Nearest lattice node by Euclidean distance; ties go to the smaller ray,
    /// then the smaller depth.
    pub fn closest_node(&self, p: Point) -> NodeIndex {
        let p = if self.ndim() == 2 { Point::xy(p.x, p.y) } else { p };
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, q) in self.positions.iter().enumerate() {
            let d = q.distance_squared(p);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        NodeIndex::new(best / self.nodes_per_ray, best % self.nodes_per_ray)
    }
}
