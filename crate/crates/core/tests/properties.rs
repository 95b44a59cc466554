use proptest::prelude::*;

use raycut::cutbuilder::{estimate_mean, BuildConfig, CostField, RefinementSeed};
use raycut::evalbench::{boundary_cost, brute_force_boundary, brute_force_min_cut, dice};
use raycut::flownet::{max_flow, max_flow_with, Capacity, FlowNetwork, Solver, Vertex};
use raycut::imaging::{Mask, ScalarGrid};
use raycut::segmenter::{segment, SegmentationRequest};
use raycut::templates::{generate_rays, NodeIndex, Template};
use raycut::{Error, Point};

#[derive(Debug, Clone)]
struct ArcSpec {
    from: usize,
    to: usize,
    cap: Option<u8>,
}

fn vertex(i: usize, n: usize) -> Vertex {
    match i {
        i if i == n => Vertex::Source,
        i if i == n + 1 => Vertex::Sink,
        i => Vertex::Node(i),
    }
}

fn network(n: usize, arcs: &[ArcSpec]) -> FlowNetwork {
    let mut net = FlowNetwork::new(n);
    for a in arcs {
        let (from, to) = (vertex(a.from % (n + 2), n), vertex(a.to % (n + 2), n));
        let cap = match a.cap {
            Some(c) => Capacity::finite(c as f64).unwrap(),
            None => Capacity::INFINITE,
        };
        // invalid endpoints (into SOURCE, out of SINK, loops) are simply skipped
        let _ = net.add_arc(from, to, cap);
    }
    net
}

fn arc_strategy() -> impl Strategy<Value = ArcSpec> {
    (0usize..64, 0usize..64, prop::option::weighted(0.7, 0u8..=10)).prop_map(|(from, to, cap)| ArcSpec {
        from,
        to,
        cap,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn max_flow_equals_exhaustive_min_cut(n in 1usize..=10, arcs in prop::collection::vec(arc_strategy(), 0..30)) {
        let net = network(n, &arcs);
        match (max_flow(&net), brute_force_min_cut(&net)) {
            (Ok(labels), Ok((value, _))) => {
                prop_assert_eq!(labels.flow_value(), value);
                prop_assert_eq!(net.cut_capacity(labels.sides()).value(), Some(value));
            }
            (Err(Error::InfeasibleCut), Err(Error::InfeasibleCut)) => {}
            (a, b) => prop_assert!(false, "solver {:?} vs oracle {:?}", a.map(|l| l.flow_value()), b.map(|b| b.0)),
        }
    }

    #[test]
    fn solvers_agree_on_canonical_labels(n in 1usize..=12, arcs in prop::collection::vec(arc_strategy(), 0..40)) {
        let net = network(n, &arcs);
        match (max_flow_with(&net, Solver::BoykovKolmogorov), max_flow_with(&net, Solver::Bfs)) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.flow_value(), b.flow_value());
                prop_assert_eq!(a.sides(), b.sides());
            }
            (Err(Error::InfeasibleCut), Err(Error::InfeasibleCut)) => {}
            _ => prop_assert!(false, "solvers disagree on feasibility"),
        }
    }

    #[test]
    fn dice_is_symmetric_and_bounded(a in prop::collection::vec(any::<bool>(), 1..64), seed in any::<u64>()) {
        let b: Vec<bool> = a.iter().enumerate().map(|(i, &x)| x ^ ((seed >> (i % 64)) & 1 == 1)).collect();
        let (ma, mb) = (Mask::new(vec![a.len(), 1], a).unwrap(), Mask::new(vec![b.len(), 1], b).unwrap());
        let d = dice(&ma, &mb).unwrap();
        prop_assert_eq!(d, dice(&mb, &ma).unwrap());
        prop_assert!((0.0..=1.0).contains(&d));
    }
}

fn random_grid(values: &[u8]) -> ScalarGrid {
    ScalarGrid::with_unit_spacing(vec![16, 16], values.iter().map(|&v| v as f64).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn segmentation_invariants_on_random_images(
        values in prop::collection::vec(any::<u8>(), 256),
        rays in 3usize..12,
        nodes in 2usize..10,
        delta_frac in 0.0f64..1.0,
        sx in 5.0f64..10.0,
        sy in 5.0f64..10.0,
        refine in prop::option::of((0usize..12, 0usize..10)),
    ) {
        let grid = random_grid(&values);
        let delta = ((nodes - 1) as f64 * delta_frac) as usize;
        let cfg = BuildConfig { delta, rays, nodes_per_ray: nodes, mean_radius_mm: 2.0, ..Default::default() };
        let template = Template::circle(12.0).unwrap();
        let seed = Point::xy(sx, sy);
        let mut req = SegmentationRequest::new(template.clone(), seed, cfg.clone());
        let geom = generate_rays(&template, seed, rays, nodes).unwrap();
        if let Some((r, k)) = refine {
            req.refinement_seeds.push(RefinementSeed::new("r", geom.position(NodeIndex::new(r % rays, k % nodes))));
        }
        let res = segment(&grid, &req).unwrap();
        for &(a, b) in geom.adjacency() {
            prop_assert!(res.boundary[a].abs_diff(res.boundary[b]) <= delta);
        }
        for n in &res.snapped_refinements {
            prop_assert_eq!(res.boundary[n.ray], n.depth);
        }
        for (r, v) in res.contour.vertices().iter().enumerate() {
            prop_assert_eq!(*v, geom.position(NodeIndex::new(r, res.boundary[r])));
        }
        // every voxel within the smallest boundary radius is foreground
        let inner = res.contour.vertices().iter().map(|v| v.distance(seed)).fold(f64::INFINITY, f64::min);
        for y in 0..16 {
            for x in 0..16 {
                if Point::xy(x as f64, y as f64).distance(seed) <= inner {
                    prop_assert!(res.mask.get([x, y, 0]));
                }
            }
        }
    }

    #[test]
    fn small_lattice_cost_matches_enumeration(
        values in prop::collection::vec(any::<u8>(), 256),
        rays in 3usize..=4,
        nodes in 2usize..=6,
        delta in 0usize..=2,
    ) {
        let delta = delta.min(nodes - 1);
        let grid = random_grid(&values);
        let cfg = BuildConfig { delta, rays, nodes_per_ray: nodes, mean_radius_mm: 2.0, ..Default::default() };
        let template = Template::circle(12.0).unwrap();
        let seed = Point::xy(7.5, 7.5);
        let res = segment(&grid, &SegmentationRequest::new(template.clone(), seed, cfg.clone())).unwrap();
        let geom = generate_rays(&template, seed, rays, nodes).unwrap();
        let mu = estimate_mean(&grid, seed, &[], &cfg).unwrap();
        let cost = CostField::sample(&grid, &geom, mu);
        let (_, best) = brute_force_boundary(&geom, &cost, &cfg).unwrap();
        prop_assert_eq!(boundary_cost(&cost, &res.boundary), best);
    }

    #[test]
    fn zero_delta_propagates_refinement_depth(rays in 3usize..40, nodes in 2usize..20, r in 0usize..40, k in 0usize..20) {
        let grid = ScalarGrid::filled(vec![40, 40], 90.0).unwrap();
        let template = Template::circle(30.0).unwrap();
        let seed = Point::xy(19.5, 19.5);
        let geom = generate_rays(&template, seed, rays, nodes).unwrap();
        let node = NodeIndex::new(r % rays, k % nodes);
        let cfg = BuildConfig { delta: 0, rays, nodes_per_ray: nodes, ..Default::default() };
        let req = SegmentationRequest::new(template, seed, cfg)
            .with_refinement(RefinementSeed::new("r", geom.position(node)));
        let res = segment(&grid, &req).unwrap();
        prop_assert!(res.boundary.iter().all(|&b| b == node.depth));
    }
}
