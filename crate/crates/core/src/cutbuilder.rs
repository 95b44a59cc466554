//! Turns a ray lattice and image intensities into a flow network.
//!
//! Each sample gets a deviation `d(r,k) = |I(r,k) - mu|` from the seed-region
//! mean. Node cost accumulates `d - tau` outward along the ray, where `tau`
//! is half the largest deviation on the lattice, so the cost of stopping at
//! depth `b` is low when the samples up to `b` look like the seed region and
//! the ones beyond do not. Terminal arcs carry the forward difference of the
//! node cost, which makes the cut capacity of a boundary vector `b` equal to
//! `sum_r c(r, b_r)` up to a constant. Depth 0 is tied to SOURCE with an
//! infinite arc. Infinite intra-arcs make the source side of each ray a
//! prefix; infinite inter-arcs bound neighbouring boundary depths by delta.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flownet::{rebuild_with, Arc, Capacity, FlowNetwork, Vertex};
use crate::geom::Point;
use crate::imaging::ScalarGrid;
use crate::templates::{NodeIndex, RayGeometry};

/// Lattice and cost-model parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BuildConfig {
    /// Maximum boundary-depth difference between adjacent rays.
    pub delta: usize,
    pub rays: usize,
    pub nodes_per_ray: usize,
    /// Latitude rows for 3D templates; `None` picks about `sqrt(rays / 2)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lat_rows: Option<usize>,
    /// Radius of the averaging ball around the seed(s), mm.
    pub mean_radius_mm: f64,
    pub include_refinement_in_mean: bool,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self {
            delta: 2,
            rays: 30,
            nodes_per_ray: 30,
            lat_rows: None,
            mean_radius_mm: 5.0,
            include_refinement_in_mean: false,
        }
    }
}

impl BuildConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rays < 3 {
            return Err(Error::validation(format!("rays must be >= 3, got {}", self.rays)));
        }
        if self.nodes_per_ray < 2 {
            return Err(Error::validation(format!(
                "nodes per ray must be >= 2, got {}",
                self.nodes_per_ray
            )));
        }
        if self.delta > self.nodes_per_ray - 1 {
            return Err(Error::validation(format!(
                "delta {} exceeds nodes per ray - 1 ({})",
                self.delta,
                self.nodes_per_ray - 1
            )));
        }
        if !(self.mean_radius_mm > 0.0 && self.mean_radius_mm.is_finite()) {
            return Err(Error::validation("mean radius must be positive"));
        }
        Ok(())
    }
}

/// Node costs indexed `r * N + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostField {
    mu: f64,
    tau: f64,
    nodes_per_ray: usize,
    node_cost: Vec<f64>,
}

impl CostField {
    /// Samples the image at every lattice node and accumulates `d - tau`
    /// along each ray, with `c(r,0) = 0`.
    pub fn sample(grid: &ScalarGrid, geom: &RayGeometry, mu: f64) -> Self {
        let n = geom.nodes_per_ray();
        let mut dev = Vec::with_capacity(geom.node_count());
        for r in 0..geom.ray_count() {
            dev.extend(geom.ray_positions(r).iter().map(|&p| (grid.sample_at(p) - mu).abs()));
        }
        let tau = 0.5 * dev.iter().fold(0.0f64, |m, &d| m.max(d));
        let mut node_cost = Vec::with_capacity(dev.len());
        for ray in dev.chunks(n) {
            let mut acc = 0.0;
            node_cost.push(acc);
            for &d in &ray[1..] {
                acc += d - tau;
                node_cost.push(acc);
            }
        }
        Self {
            mu,
            tau,
            nodes_per_ray: n,
            node_cost,
        }
    }

    /// Direct construction from precomputed node costs.
    pub fn from_costs(mu: f64, nodes_per_ray: usize, node_cost: Vec<f64>) -> Result<Self> {
        if nodes_per_ray == 0 || node_cost.len() % nodes_per_ray != 0 {
            return Err(Error::validation("cost count must be a multiple of nodes per ray"));
        }
        if node_cost.iter().any(|c| !c.is_finite()) {
            return Err(Error::validation("node costs must be finite"));
        }
        Ok(Self {
            mu,
            tau: 0.0,
            nodes_per_ray,
            node_cost,
        })
    }

    /// Deviation threshold separating object-like from background-like samples.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nodes_per_ray(&self) -> usize {
        self.nodes_per_ray
    }

    pub fn ray_count(&self) -> usize {
        self.node_cost.len() / self.nodes_per_ray
    }

    pub fn cost(&self, node: NodeIndex) -> f64 {
        self.node_cost[node.ray * self.nodes_per_ray + node.depth]
    }

    pub fn ray_costs(&self, r: usize) -> &[f64] {
        &self.node_cost[r * self.nodes_per_ray..(r + 1) * self.nodes_per_ray]
    }
}

/// A user point on the object contour that forces the cut through its
/// nearest lattice node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementSeed {
    pub id: String,
    pub position: Point,
    /// Nearest lattice node; refreshed by [`RefinementSeed::resnap`] on every rebuild.
    #[serde(default)]
    pub snapped: Option<NodeIndex>,
}

impl RefinementSeed {
    pub fn new(id: impl Into<String>, position: Point) -> Self {
        Self {
            id: id.into(),
            position,
            snapped: None,
        }
    }

    pub fn resnap(&mut self, geom: &RayGeometry) -> NodeIndex {
        let node = geom.closest_node(self.position);
        self.snapped = Some(node);
        node
    }
}

/// Dense node ids `r * N + k` for the regular nodes of an assembled network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeMap {
    ray_count: usize,
    nodes_per_ray: usize,
}

impl NodeMap {
    pub fn new(ray_count: usize, nodes_per_ray: usize) -> Self {
        Self {
            ray_count,
            nodes_per_ray,
        }
    }

    pub fn ray_count(&self) -> usize {
        self.ray_count
    }

    pub fn nodes_per_ray(&self) -> usize {
        self.nodes_per_ray
    }

    pub fn id(&self, node: NodeIndex) -> usize {
        node.ray * self.nodes_per_ray + node.depth
    }

    pub fn vertex(&self, node: NodeIndex) -> Vertex {
        Vertex::Node(self.id(node))
    }

    pub fn node(&self, id: usize) -> NodeIndex {
        NodeIndex::new(id / self.nodes_per_ray, id % self.nodes_per_ray)
    }
}

/// Mean stored intensity over voxel centers within `mean_radius_mm` of the
/// primary seed (or of any seed when refinement seeds are included). Falls
/// back to `sample_at(primary)` when no voxel center is in range.
pub fn estimate_mean(
    grid: &ScalarGrid,
    primary: Point,
    refinements: &[RefinementSeed],
    cfg: &BuildConfig,
) -> Result<f64> {
    let radius = cfg.mean_radius_mm;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::validation("mean radius must be positive"));
    }
    let nd = grid.ndim();
    let flatten = |p: Point| if nd == 2 { Point::xy(p.x, p.y) } else { p };
    let mut centers = vec![flatten(primary)];
    if cfg.include_refinement_in_mean {
        centers.extend(refinements.iter().map(|s| flatten(s.position)));
    }
    let mut lo = [0usize; 3];
    let mut hi = [0usize; 3];
    for a in 0..nd {
        let dim = grid.dims()[a];
        let (mut l, mut h) = (f64::INFINITY, f64::NEG_INFINITY);
        for c in &centers {
            l = l.min(grid.continuous_index(*c, a) - radius / grid.spacing()[a]);
            h = h.max(grid.continuous_index(*c, a) + radius / grid.spacing()[a]);
        }
        if h < 0.0 || l > (dim - 1) as f64 {
            return Ok(grid.sample_at(primary));
        }
        lo[a] = l.ceil().max(0.0) as usize;
        hi[a] = (h.floor() as usize).min(dim - 1);
    }
    let r2 = radius * radius;
    let (mut sum, mut count) = (0.0, 0usize);
    let zrange = if nd == 3 { lo[2]..=hi[2] } else { 0..=0 };
    for z in zrange {
        for y in lo[1]..=hi[1] {
            for x in lo[0]..=hi[0] {
                let p = grid.voxel_center([x, y, z]);
                if centers.iter().any(|c| c.distance_squared(p) <= r2) {
                    sum += grid.get([x, y, z]);
                    count += 1;
                }
            }
        }
    }
    Ok(if count == 0 {
        grid.sample_at(primary)
    } else {
        sum / count as f64
    })
}

/// Terminal arcs under the forward-difference rule: an infinite
/// SOURCE -> (r,0) arc per ray; for `k >= 1` with `w = c(r,k) - c(r,k-1)`,
/// SOURCE -> (r,k) of capacity `-w` when `w < 0`, (r,k) -> SINK of capacity
/// `w` when `w > 0`, nothing when `w == 0`.
pub fn terminal_weights(cost: &CostField) -> Vec<Arc> {
    let map = NodeMap::new(cost.ray_count(), cost.nodes_per_ray());
    let mut arcs = Vec::with_capacity(cost.node_cost.len());
    for r in 0..cost.ray_count() {
        push_ray_terminals(&mut arcs, map, r, cost.ray_costs(r));
    }
    arcs
}

fn push_ray_terminals(arcs: &mut Vec<Arc>, map: NodeMap, r: usize, costs: &[f64]) {
    arcs.push(Arc {
        from: Vertex::Source,
        to: map.vertex(NodeIndex::new(r, 0)),
        cap: Capacity::INFINITE,
    });
    for k in 1..costs.len() {
        let w = costs[k] - costs[k - 1];
        let node = map.vertex(NodeIndex::new(r, k));
        if w < 0.0 {
            arcs.push(Arc {
                from: Vertex::Source,
                to: node,
                cap: Capacity::finite(-w).expect("finite cost difference"),
            });
        } else if w > 0.0 {
            arcs.push(Arc {
                from: node,
                to: Vertex::Sink,
                cap: Capacity::finite(w).expect("finite cost difference"),
            });
        }
    }
}

/// Builds the full network: terminal arcs, infinite intra-arcs
/// (r,k) -> (r,k-1), and for every adjacent ray pair and depth the two
/// infinite inter-arcs (r,k) -> (r', max(0, k - delta)) and back.
pub fn assemble_network(geom: &RayGeometry, cost: &CostField, cfg: &BuildConfig) -> Result<(FlowNetwork, NodeMap)> {
    let (rays, n) = (geom.ray_count(), geom.nodes_per_ray());
    if cost.ray_count() != rays || cost.nodes_per_ray() != n {
        return Err(Error::validation("cost field and ray geometry differ in size"));
    }
    if cfg.delta > n - 1 {
        return Err(Error::validation(format!(
            "delta {} exceeds nodes per ray - 1",
            cfg.delta
        )));
    }
    let map = NodeMap::new(rays, n);
    let adjacency = geom.adjacency();
    let mut arcs = Vec::with_capacity(rays * (2 * n) + 2 * adjacency.len() * n);
    for r in 0..rays {
        push_ray_terminals(&mut arcs, map, r, cost.ray_costs(r));
        for k in 1..n {
            arcs.push(Arc {
                from: map.vertex(NodeIndex::new(r, k)),
                to: map.vertex(NodeIndex::new(r, k - 1)),
                cap: Capacity::INFINITE,
            });
        }
    }
    for &(a, b) in adjacency {
        for k in 0..n {
            let lower = k.saturating_sub(cfg.delta);
            arcs.push(Arc {
                from: map.vertex(NodeIndex::new(a, k)),
                to: map.vertex(NodeIndex::new(b, lower)),
                cap: Capacity::INFINITE,
            });
            arcs.push(Arc {
                from: map.vertex(NodeIndex::new(b, k)),
                to: map.vertex(NodeIndex::new(a, lower)),
                cap: Capacity::INFINITE,
            });
        }
    }
    let mut net = FlowNetwork::with_capacity(map.ray_count() * n, arcs.len());
    for a in arcs {
        net.add_arc(a.from, a.to, a.cap)?;
    }
    Ok((net, map))
}

/// Forces the cut through the seed's snapped node `(r,k)`: infinite
/// SOURCE -> (r,j) for `j <= k`, infinite (r,j) -> SINK for `j > k`, and the
/// intra-arc (r,k+1) -> (r,k) removed when `k < N-1`.
///
/// Contradictory seeds are not detected here; they surface as an infeasible
/// cut when the network is solved.
pub fn apply_refinement(
    net: &FlowNetwork,
    map: &NodeMap,
    seed: &RefinementSeed,
    geom: &RayGeometry,
) -> Result<FlowNetwork> {
    let node = seed
        .snapped
        .ok_or_else(|| Error::validation(format!("refinement seed {} is not snapped", seed.id)))?;
    let n = geom.nodes_per_ray();
    if node.ray >= geom.ray_count() || node.depth >= n {
        return Err(Error::validation(format!(
            "refinement seed {} snapped outside the lattice",
            seed.id
        )));
    }
    let mut extra = Vec::with_capacity(n);
    for j in 0..n {
        let v = map.vertex(NodeIndex::new(node.ray, j));
        extra.push(if j <= node.depth {
            Arc {
                from: Vertex::Source,
                to: v,
                cap: Capacity::INFINITE,
            }
        } else {
            Arc {
                from: v,
                to: Vertex::Sink,
                cap: Capacity::INFINITE,
            }
        });
    }
    let removed: Vec<(Vertex, Vertex)> = if node.depth + 1 < n {
        vec![(map.vertex(NodeIndex::new(node.ray, node.depth + 1)), map.vertex(node))]
    } else {
        Vec::new()
    };
    rebuild_with(net, &extra, &removed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flownet::max_flow;
    use crate::imaging::{make_phantom, PhantomSpec};
    use crate::templates::{generate_rays, Template};

    fn lattice(rays: usize, nodes: usize) -> RayGeometry {
        generate_rays(&Template::circle(20.0).unwrap(), Point::xy(16.0, 16.0), rays, nodes).unwrap()
    }

    #[test]
    fn mean_of_constant_grid() {
        let g = ScalarGrid::filled(vec![16, 16], 7.0).unwrap();
        for radius in [0.5, 3.0, 100.0] {
            let cfg = BuildConfig {
                mean_radius_mm: radius,
                ..Default::default()
            };
            assert_eq!(estimate_mean(&g, Point::xy(7.3, 8.1), &[], &cfg).unwrap(), 7.0);
        }
    }

    #[test]
    fn mean_inside_noiseless_disc() {
        let (g, _) = make_phantom(&PhantomSpec::disc(64, 20.0, 200.0, 50.0, 0.0), 0).unwrap();
        let mu = estimate_mean(&g, Point::xy(31.5, 31.5), &[], &BuildConfig::default()).unwrap();
        assert_eq!(mu, 200.0);
    }

    #[test]
    fn mean_straddling_edge_matches_enumeration() {
        // left half 200, right half 50
        let values = (0..20 * 20).map(|i| if i % 20 < 10 { 200.0 } else { 50.0 }).collect();
        let g = ScalarGrid::with_unit_spacing(vec![20, 20], values).unwrap();
        let seed = Point::xy(9.5, 10.2);
        let cfg = BuildConfig {
            mean_radius_mm: 3.0,
            ..Default::default()
        };
        let (mut sum, mut count) = (0.0, 0);
        for y in 0..20 {
            for x in 0..20 {
                let (dx, dy) = (x as f64 - 9.5, y as f64 - 10.2);
                if dx * dx + dy * dy <= 9.0 {
                    sum += if x < 10 { 200.0 } else { 50.0 };
                    count += 1;
                }
            }
        }
        assert_eq!(estimate_mean(&g, seed, &[], &cfg).unwrap(), sum / count as f64);
        assert!((estimate_mean(&g, seed, &[], &cfg).unwrap() - 125.0).abs() < 1e-9);
    }

    #[test]
    fn mean_falls_back_to_seed_sample() {
        let values = (0..10 * 10).map(|i| i as f64).collect();
        let g = ScalarGrid::new(vec![10, 10], vec![4.0, 4.0], vec![0.0, 0.0], values).unwrap();
        let cfg = BuildConfig {
            mean_radius_mm: 0.5,
            ..Default::default()
        };
        let seed = Point::xy(6.0, 6.0);
        assert_eq!(estimate_mean(&g, seed, &[], &cfg).unwrap(), g.sample_at(seed));
    }

    #[test]
    fn mean_with_refinements_uses_union() {
        let values = (0..20 * 20).map(|i| if i % 20 < 10 { 200.0 } else { 50.0 }).collect();
        let g = ScalarGrid::with_unit_spacing(vec![20, 20], values).unwrap();
        let refine = [RefinementSeed::new("r1", Point::xy(15.0, 10.0))];
        let mut cfg = BuildConfig {
            mean_radius_mm: 2.0,
            ..Default::default()
        };
        let seed = Point::xy(4.0, 10.0);
        assert_eq!(estimate_mean(&g, seed, &refine, &cfg).unwrap(), 200.0);
        cfg.include_refinement_in_mean = true;
        assert_eq!(estimate_mean(&g, seed, &refine, &cfg).unwrap(), 125.0);
    }

    #[test]
    fn constant_image_has_only_depth_zero_arcs() {
        let cost = CostField::from_costs(0.0, 5, vec![0.0; 15]).unwrap();
        let arcs = terminal_weights(&cost);
        assert_eq!(arcs.len(), 3);
        assert!(arcs.iter().all(|a| a.from == Vertex::Source && a.cap.is_infinite()));
    }

    #[test]
    fn difference_rule_on_one_ray() {
        let cost = CostField::from_costs(0.0, 4, vec![5.0, 1.0, 0.0, 4.0]).unwrap();
        let arcs = terminal_weights(&cost);
        let expect = [
            (Vertex::Source, Vertex::Node(0), Capacity::INFINITE),
            (Vertex::Source, Vertex::Node(1), Capacity::finite(4.0).unwrap()),
            (Vertex::Source, Vertex::Node(2), Capacity::finite(1.0).unwrap()),
            (Vertex::Node(3), Vertex::Sink, Capacity::finite(4.0).unwrap()),
        ];
        let got: Vec<_> = arcs.iter().map(|a| (a.from, a.to, a.cap)).collect();
        assert_eq!(got, expect);
        // the cut lands at the cheapest node (depth 2)
        let geom = generate_rays(&Template::circle(10.0).unwrap(), Point::ORIGIN, 3, 4).unwrap();
        let cost3 = CostField::from_costs(0.0, 4, [5.0, 1.0, 0.0, 4.0].repeat(3)).unwrap();
        let (net, _) = assemble_network(
            &geom,
            &cost3,
            &BuildConfig {
                delta: 1,
                nodes_per_ray: 4,
                ..Default::default()
            },
        )
        .unwrap();
        let cut = max_flow(&net).unwrap();
        assert_eq!(
            cut.sides()
                .iter()
                .filter(|s| **s == crate::flownet::Side::Source)
                .count(),
            9
        );
    }

    #[test]
    fn cost_minimum_sits_at_last_object_sample() {
        let (grid, _) = make_phantom(&PhantomSpec::disc(33, 10.0, 200.0, 50.0, 0.0), 0).unwrap();
        let geom = generate_rays(&Template::circle(30.0).unwrap(), Point::xy(16.0, 16.0), 8, 21).unwrap();
        let cost = CostField::sample(&grid, &geom, 200.0);
        assert_eq!(cost.tau(), 75.0);
        for r in 0..8 {
            let costs = cost.ray_costs(r);
            let argmin = (0..21)
                .min_by(|&a, &b| costs[a].total_cmp(&costs[b]).then(a.cmp(&b)))
                .unwrap();
            let last_inside = (0..21)
                .filter(|&k| grid.sample_at(geom.position(NodeIndex::new(r, k))) > 125.0)
                .max()
                .unwrap();
            assert_eq!(argmin, last_inside, "ray {r}");
        }
    }

    #[test]
    fn affine_intensity_scales_capacities() {
        let geom = lattice(6, 8);
        let (grid, _) = make_phantom(&PhantomSpec::disc(33, 7.0, 200.0, 50.0, 4.0), 5).unwrap();
        let cfg = BuildConfig::default();
        let caps = |g: &ScalarGrid| {
            let mu = estimate_mean(g, geom.seed(), &[], &cfg).unwrap();
            terminal_weights(&CostField::sample(g, &geom, mu))
        };
        let base = caps(&grid);
        // dyadic scale: bit-exact
        let scaled = caps(&grid.map_values(|v| 2.0 * v).unwrap());
        for (a, b) in base.iter().zip(&scaled) {
            assert_eq!((a.from, a.to), (b.from, b.to));
            match (a.cap.value(), b.cap.value()) {
                (Some(x), Some(y)) => assert_eq!(2.0 * x, y),
                (None, None) => {}
                _ => panic!("finiteness changed"),
            }
        }
        let shifted = caps(&grid.map_values(|v| 3.0 * v + 100.0).unwrap());
        for (a, b) in base.iter().zip(&shifted) {
            if let (Some(x), Some(y)) = (a.cap.value(), b.cap.value()) {
                assert!((3.0 * x - y).abs() <= 1e-9 * y.max(1.0));
            }
        }
    }

    #[test]
    fn network_counts_small_lattice() {
        let geom = lattice(3, 2);
        let cost = CostField::from_costs(0.0, 2, vec![0.0; 6]).unwrap();
        let cfg = BuildConfig {
            delta: 0,
            nodes_per_ray: 2,
            ..Default::default()
        };
        let (net, map) = assemble_network(&geom, &cost, &cfg).unwrap();
        assert_eq!(net.node_count(), 6);
        let infinite_internal = net
            .arcs()
            .iter()
            .filter(|a| matches!((a.from, a.to), (Vertex::Node(_), Vertex::Node(_))))
            .count();
        assert_eq!(infinite_internal, 3 * 1 + 2 * 3 * 2);
        for a in net.arcs() {
            if let (Vertex::Node(u), Vertex::Node(v)) = (a.from, a.to) {
                let (nu, nv) = (map.node(u), map.node(v));
                if nu.ray != nv.ray {
                    assert_eq!(nu.depth, nv.depth);
                }
            }
        }
    }

    #[test]
    fn full_delta_clamps_inter_arcs_to_depth_zero() {
        let geom = lattice(4, 5);
        let cost = CostField::from_costs(0.0, 5, vec![0.0; 20]).unwrap();
        let cfg = BuildConfig {
            delta: 4,
            nodes_per_ray: 5,
            ..Default::default()
        };
        let (net, map) = assemble_network(&geom, &cost, &cfg).unwrap();
        for a in net.arcs() {
            if let (Vertex::Node(u), Vertex::Node(v)) = (a.from, a.to) {
                let (nu, nv) = (map.node(u), map.node(v));
                if nu.ray != nv.ray && nu.depth < 4 {
                    assert_eq!(nv.depth, 0);
                }
            }
        }
    }

    #[test]
    fn refinement_wiring_edits() {
        let geom = lattice(3, 5);
        let cost = CostField::from_costs(0.0, 5, vec![0.0; 15]).unwrap();
        let cfg = BuildConfig {
            delta: 1,
            nodes_per_ray: 5,
            ..Default::default()
        };
        let (net, map) = assemble_network(&geom, &cost, &cfg).unwrap();
        let mut seed = RefinementSeed::new("r1", geom.position(NodeIndex::new(1, 2)));
        assert!(apply_refinement(&net, &map, &seed, &geom).is_err());
        assert_eq!(seed.resnap(&geom), NodeIndex::new(1, 2));
        let wired = apply_refinement(&net, &map, &seed, &geom).unwrap();
        assert_eq!(wired.arcs().len(), net.arcs().len() + 5 - 1);
        let intra = (map.vertex(NodeIndex::new(1, 3)), map.vertex(NodeIndex::new(1, 2)));
        assert!(!wired.arcs().iter().any(|a| (a.from, a.to) == intra));

        seed.snapped = Some(NodeIndex::new(1, 4));
        let outer = apply_refinement(&net, &map, &seed, &geom).unwrap();
        assert_eq!(outer.arcs().len(), net.arcs().len() + 5);
    }

    #[test]
    fn config_validation() {
        assert!(BuildConfig::default().validate().is_ok());
        let bad = BuildConfig {
            delta: 30,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = BuildConfig {
            mean_radius_mm: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let doc: BuildConfig = serde_json::from_str(r#"{"delta": 1, "rays": 12}"#).unwrap();
        assert_eq!(doc.nodes_per_ray, 30);
        assert_eq!(doc.delta, 1);
    }
}
