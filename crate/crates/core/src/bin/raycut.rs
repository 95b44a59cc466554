use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use raycut::cutbuilder::{BuildConfig, RefinementSeed};
use raycut::evalbench::{dice, run_benchmark, BenchmarkSetup, MIN_REPETITIONS};
use raycut::imaging::{
    load_grid_auto, load_mask, make_phantom, save_grid, save_mask, ImageFormat, PhantomKind, PhantomSpec, ScalarGrid,
};
use raycut::segmenter::{segment, SegmentationRequest};
use raycut::service::{serve, SessionStore};
use raycut::templates::Template;
use raycut::{Error, Point};

/// Interactive template-based ray-graph segmentation.
#[derive(Debug, Parser)]
#[command(name = "raycut", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Segment one object from a seed point.
    Segment(SegmentArgs),
    /// Write a synthetic phantom image and its ground-truth mask.
    Phantom(PhantomArgs),
    /// Print the Dice similarity of two masks.
    Eval(EvalArgs),
    /// Time segmentations over a grid of lattice sizes.
    Bench(BenchArgs),
    /// Run the HTTP session service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct LatticeArgs {
    /// Max boundary depth difference between adjacent rays.
    #[arg(long, default_value_t = 2)]
    delta: usize,
    /// Ray count, or ROWSxCOLS for 3D templates.
    #[arg(long, default_value = "30")]
    rays: String,
    /// Nodes sampled per ray.
    #[arg(long, default_value_t = 30)]
    nodes: usize,
    /// Radius in mm of the averaging region around the seed.
    #[arg(long, default_value_t = 5.0)]
    mean_radius: f64,
}

impl LatticeArgs {
    fn build_config(&self) -> Result<BuildConfig, Error> {
        let (rays, lat_rows) = parse_rays(&self.rays)?;
        Ok(BuildConfig {
            delta: self.delta,
            rays,
            nodes_per_ray: self.nodes,
            lat_rows,
            mean_radius_mm: self.mean_radius,
            include_refinement_in_mean: false,
        })
    }
}

#[derive(Debug, Args)]
struct SegmentArgs {
    /// Input image (.pgm, .png or .mhd).
    #[arg(long)]
    image: PathBuf,
    /// Template: shorthand like circle:80, square:80, rectangle:60x40,
    /// triangle:x,y;x,y;x,y, sphere:80, cube:60, or a JSON file.
    #[arg(long)]
    template: Option<String>,
    /// Primary seed, x,y or x,y,z (mm unless --voxel-coords).
    #[arg(long, allow_hyphen_values = true)]
    seed: String,
    /// Refinement seed on the object contour; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    refine: Vec<String>,
    #[command(flatten)]
    lattice: LatticeArgs,
    /// Interpret seed coordinates as voxel indices.
    #[arg(long)]
    voxel_coords: bool,
    /// Write the mask (.pgm, .png or .mhd).
    #[arg(long)]
    out_mask: Option<PathBuf>,
    /// Write the contour document (JSON).
    #[arg(long)]
    out_contour: Option<PathBuf>,
    /// Write the full result document (JSON).
    #[arg(long)]
    out_result: Option<PathBuf>,
    /// Ground-truth mask; prints the Dice score.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PhantomArgs {
    /// disc, sphere, rectangle or box.
    #[arg(long, default_value = "disc")]
    kind: String,
    /// Radius in mm (disc, sphere).
    #[arg(long, default_value_t = 20.0)]
    radius: f64,
    /// Half-extents in mm (rectangle, box), e.g. 20,12.
    #[arg(long)]
    half_extent: Option<String>,
    /// Edge length in voxels of a square/cubic grid.
    #[arg(long, default_value_t = 64)]
    size: usize,
    /// Explicit grid dims, e.g. 80,60; overrides --size.
    #[arg(long)]
    dims: Option<String>,
    /// Voxel spacing in mm, one value or one per axis.
    #[arg(long, default_value = "1")]
    spacing: String,
    /// Object center in mm; defaults to the grid center.
    #[arg(long, allow_hyphen_values = true)]
    center: Option<String>,
    #[arg(long, default_value_t = 200.0)]
    fg: f64,
    #[arg(long, default_value_t = 50.0)]
    bg: f64,
    /// Standard deviation of additive Gaussian noise.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    /// Output image (.pgm, .png or .mhd).
    #[arg(long)]
    out_image: PathBuf,
    /// Output ground-truth mask (.pgm, .png or .mhd).
    #[arg(long)]
    out_mask: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    a: PathBuf,
    b: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Image to segment; defaults to a synthetic vertebra-sized rectangle.
    #[arg(long)]
    image: Option<PathBuf>,
    #[arg(long, default_value = "square:80")]
    template: String,
    /// Seed center (mm); defaults to the image center.
    #[arg(long, allow_hyphen_values = true)]
    seed: Option<String>,
    /// Comma-separated RAYSxNODES lattice sizes.
    #[arg(long, default_value = "30x30,300x30,300x300")]
    configs: String,
    /// Timed repetitions per config (at least 10).
    #[arg(long, default_value_t = MIN_REPETITIONS)]
    reps: usize,
    #[arg(long, default_value_t = 2)]
    delta: usize,
    #[arg(long, default_value_t = 5.0)]
    mean_radius: f64,
    /// Seeds are jittered uniformly by up to this many mm.
    #[arg(long, default_value_t = 1.0)]
    jitter: f64,
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    /// Write the report table (CSV).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the report document (JSON).
    #[arg(long)]
    out_json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: String,
    /// Idle sessions are dropped after this many seconds.
    #[arg(long, default_value_t = 1800)]
    session_ttl: u64,
}

fn parse_rays(s: &str) -> Result<(usize, Option<usize>), Error> {
    let bad = || Error::Validation(format!("--rays expects N or ROWSxCOLS, got '{s}'"));
    match s.split_once('x') {
        Some((r, c)) => {
            let rows: usize = r.trim().parse().map_err(|_| bad())?;
            let cols: usize = c.trim().parse().map_err(|_| bad())?;
            Ok((rows * cols, Some(rows)))
        }
        None => Ok((s.trim().parse().map_err(|_| bad())?, None)),
    }
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, Error> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Validation(format!("{what}: '{s}' is not a comma-separated number list")))
        })
        .collect()
}

fn parse_point(s: &str, ndim: usize, what: &str) -> Result<Point, Error> {
    let v = parse_list(s, what)?;
    if v.len() != ndim {
        return Err(Error::Validation(format!(
            "{what} needs {ndim} coordinates for a {ndim}D image, got '{s}'"
        )));
    }
    Ok(Point::from_slice(&v).expect("2 or 3 coordinates"))
}

fn to_world(grid: &ScalarGrid, p: Point) -> Point {
    let c = |a: usize| grid.origin()[a] + p.axis(a) * grid.spacing()[a];
    if grid.ndim() == 3 {
        Point::new(c(0), c(1), c(2))
    } else {
        Point::xy(c(0), c(1))
    }
}

fn require_file(path: &Path, what: &str) -> Result<(), Error> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Validation(format!("{what} {} does not exist", path.display())))
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn cmd_segment(args: &SegmentArgs) -> Result<(), Error> {
    require_file(&args.image, "image")?;
    let grid = load_grid_auto(&args.image)?;
    let template = match &args.template {
        Some(t) => Template::parse(t)?,
        None if grid.ndim() == 3 => Template::sphere(80.0)?,
        None => Template::circle(80.0)?,
    };
    let map = |p: Point| if args.voxel_coords { to_world(&grid, p) } else { p };
    let seed = map(parse_point(&args.seed, grid.ndim(), "--seed")?);
    let mut req = SegmentationRequest::new(template, seed, args.lattice.build_config()?);
    for (i, r) in args.refine.iter().enumerate() {
        let p = map(parse_point(r, grid.ndim(), "--refine")?);
        req.refinement_seeds
            .push(RefinementSeed::new(format!("refine{}", i + 1), p));
    }

    let res = segment(&grid, &req)?;

    if let Some(path) = &args.out_mask {
        save_mask(&res.mask, path, ImageFormat::from_path(path)?)?;
    }
    if let Some(path) = &args.out_contour {
        let doc = json!({ "seed": res.seed, "boundary": res.boundary, "contour": res.contour });
        write_text(path, &serde_json::to_string_pretty(&doc).expect("contour serializes"))?;
    }
    if let Some(path) = &args.out_result {
        write_text(path, &res.to_json())?;
    }

    let t = &res.timing;
    println!(
        "segmented {} rays x {} nodes: {} foreground voxels, flow {:.6}",
        req.config.rays,
        req.config.nodes_per_ray,
        res.mask.count(),
        res.flow_value
    );
    println!(
        "timing ms: total {:.3} (rays {:.3}, sampling {:.3}, assembly {:.3}, solve {:.3}, extraction {:.3})",
        t.total_ms, t.ray_generation_ms, t.sampling_ms, t.assembly_ms, t.solve_ms, t.extraction_ms
    );
    for (seed, node) in req.refinement_seeds.iter().zip(&res.snapped_refinements) {
        println!("{} -> ray {} depth {}", seed.id, node.ray, node.depth);
    }
    if let Some(path) = &args.truth {
        require_file(path, "truth mask")?;
        println!("dice {:.6}", dice(&res.mask, &load_mask(path)?)?);
    }
    Ok(())
}

fn per_axis(values: Vec<f64>, nd: usize, what: &str) -> Result<Vec<f64>, Error> {
    match values.len() {
        1 => Ok(vec![values[0]; nd]),
        n if n == nd => Ok(values),
        _ => Err(Error::Validation(format!("{what} needs 1 or {nd} values"))),
    }
}

fn cmd_phantom(args: &PhantomArgs) -> Result<(), Error> {
    let kind = PhantomKind::parse(&args.kind)?;
    let nd = kind.ndim();
    let dims: Vec<usize> = match &args.dims {
        Some(d) => d
            .split(',')
            .map(|v| {
                v.trim()
                    .parse()
                    .map_err(|_| Error::Validation(format!("--dims: bad value '{v}'")))
            })
            .collect::<Result<_, _>>()?,
        None => vec![args.size; nd],
    };
    if dims.len() != nd {
        return Err(Error::Validation(format!("{} phantom needs {nd} dims", args.kind)));
    }
    let spacing = per_axis(parse_list(&args.spacing, "--spacing")?, nd, "--spacing")?;
    let center = match &args.center {
        Some(c) => parse_point(c, nd, "--center")?,
        None => {
            let c: Vec<f64> = (0..nd)
                .map(|a| (dims[a].max(1) - 1) as f64 * spacing[a] / 2.0)
                .collect();
            Point::from_slice(&c).expect("2 or 3 coordinates")
        }
    };
    let extent = match kind {
        PhantomKind::Disc | PhantomKind::Sphere => vec![args.radius],
        _ => match &args.half_extent {
            Some(h) => per_axis(parse_list(h, "--half-extent")?, nd, "--half-extent")?,
            None => return Err(Error::Validation(format!("{} phantom needs --half-extent", args.kind))),
        },
    };
    let spec = PhantomSpec {
        kind,
        center,
        extent,
        fg_intensity: args.fg,
        bg_intensity: args.bg,
        noise_sigma: args.noise,
        dims,
        spacing,
    };
    let (grid, mask) = make_phantom(&spec, args.rng_seed)?;
    save_grid(&grid, &args.out_image, ImageFormat::from_path(&args.out_image)?)?;
    if let Some(path) = &args.out_mask {
        save_mask(&mask, path, ImageFormat::from_path(path)?)?;
    }
    println!("phantom {:?}: {} foreground voxels", spec.dims, mask.count());
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> Result<(), Error> {
    require_file(&args.a, "mask")?;
    require_file(&args.b, "mask")?;
    let d = dice(&load_mask(&args.a)?, &load_mask(&args.b)?)?;
    println!("{d:.6}");
    Ok(())
}

fn default_bench_image() -> Result<(ScalarGrid, Point), Error> {
    // 100 mm field of view at 0.5 mm, a 50 x 40 mm body with mild noise
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
    let (grid, _) = make_phantom(&spec, 7)?;
    Ok((grid, spec.center))
}

fn cmd_bench(args: &BenchArgs) -> Result<(), Error> {
    if args.reps < MIN_REPETITIONS {
        return Err(Error::Validation(format!(
            "--reps must be at least {MIN_REPETITIONS}, got {}",
            args.reps
        )));
    }
    let configs: Vec<(usize, usize)> = args
        .configs
        .split(',')
        .map(|c| {
            let bad = || Error::Validation(format!("--configs: '{c}' is not RAYSxNODES"));
            let (r, n) = c.trim().split_once('x').ok_or_else(bad)?;
            Ok((r.parse().map_err(|_| bad())?, n.parse().map_err(|_| bad())?))
        })
        .collect::<Result<_, Error>>()?;
    let (grid, center) = match &args.image {
        Some(path) => {
            require_file(path, "image")?;
            let grid = load_grid_auto(path)?;
            let mid: Vec<f64> = grid.world_bounds().iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
            let center = Point::from_slice(&mid).expect("2 or 3 axes");
            (grid, center)
        }
        None => default_bench_image()?,
    };
    let seed_center = match &args.seed {
        Some(s) => parse_point(s, grid.ndim(), "--seed")?,
        None => center,
    };
    let setup = BenchmarkSetup {
        template: Template::parse(&args.template)?,
        delta: args.delta,
        mean_radius_mm: args.mean_radius,
        seed_center,
        jitter_mm: args.jitter,
        repetitions: args.reps,
        rng_seed: args.rng_seed,
    };
    // fail on unwritable outputs before spending time on the runs
    for path in [&args.out, &args.out_json].into_iter().flatten() {
        write_text(path, "")?;
    }
    let report = run_benchmark(&grid, &setup, &configs)?;
    if let Some(path) = &args.out {
        write_text(path, &report.to_csv())?;
    }
    if let Some(path) = &args.out_json {
        write_text(path, &report.to_json())?;
    }
    print!("{}", report.summary());
    Ok(())
}

fn cmd_serve(args: &ServeArgs) -> Result<(), Error> {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Error::Io {
        path: "tokio runtime".into(),
        source: e,
    })?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(&args.addr).await.map_err(|e| Error::Io {
            path: args.addr.clone(),
            source: e,
        })?;
        eprintln!(
            "listening on http://{}",
            listener.local_addr().map_or(args.addr.clone(), |a| a.to_string())
        );
        let store = Arc::new(SessionStore::new(Duration::from_secs(args.session_ttl)));
        serve(listener, store).await.map_err(|e| Error::Io {
            path: args.addr.clone(),
            source: e,
        })
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Segment(a) => cmd_segment(a),
        Command::Phantom(a) => cmd_phantom(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Serve(a) => cmd_serve(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
