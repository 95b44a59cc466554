use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Mask, ScalarGrid};
use crate::error::{Error, Result};
use crate::geom::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhantomKind {
    Disc,
    Sphere,
    Rectangle,
    Box,
}

impl PhantomKind {
    pub fn ndim(self) -> usize {
        match self {
            PhantomKind::Disc | PhantomKind::Rectangle => 2,
            PhantomKind::Sphere | PhantomKind::Box => 3,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "disc" => Ok(PhantomKind::Disc),
            "sphere" => Ok(PhantomKind::Sphere),
            "rectangle" => Ok(PhantomKind::Rectangle),
            "box" => Ok(PhantomKind::Box),
            other => Err(Error::validation(format!("unknown phantom kind '{other}'"))),
        }
    }
}

/// A synthetic test object on a constant background.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    pub kind: PhantomKind,
    pub center: Point,
    /// Radius (disc/sphere, one entry) or half-extent per axis (rectangle/box), mm.
    pub extent: Vec<f64>,
    pub fg_intensity: f64,
    pub bg_intensity: f64,
    /// Standard deviation of additive Gaussian noise.
    pub noise_sigma: f64,
    pub dims: Vec<usize>,
    pub spacing: Vec<f64>,
}

impl PhantomSpec {
    /// Disc on a unit-spacing square grid, centered.
    pub fn disc(size: usize, radius: f64, fg: f64, bg: f64, noise_sigma: f64) -> Self {
        let c = (size - 1) as f64 / 2.0;
        Self {
            kind: PhantomKind::Disc,
            center: Point::xy(c, c),
            extent: vec![radius],
            fg_intensity: fg,
            bg_intensity: bg,
            noise_sigma,
            dims: vec![size, size],
            spacing: vec![1.0, 1.0],
        }
    }

    /// Sphere on a unit-spacing cubic grid, centered.
    pub fn sphere(size: usize, radius: f64, fg: f64, bg: f64, noise_sigma: f64) -> Self {
        let c = (size - 1) as f64 / 2.0;
        Self {
            kind: PhantomKind::Sphere,
            center: Point::new(c, c, c),
            extent: vec![radius],
            fg_intensity: fg,
            bg_intensity: bg,
            noise_sigma,
            dims: vec![size, size, size],
            spacing: vec![1.0, 1.0, 1.0],
        }
    }

    fn half_extents(&self) -> Vec<f64> {
        let nd = self.kind.ndim();
        match self.kind {
            PhantomKind::Disc | PhantomKind::Sphere => vec![self.extent[0]; nd],
            PhantomKind::Rectangle | PhantomKind::Box => self.extent.clone(),
        }
    }

    fn validate(&self) -> Result<()> {
        let nd = self.kind.ndim();
        if self.dims.len() != nd || self.spacing.len() != nd {
            return Err(Error::validation(format!(
                "{:?} phantom needs {nd}D dims and spacing",
                self.kind
            )));
        }
        let want = match self.kind {
            PhantomKind::Disc | PhantomKind::Sphere => 1,
            _ => nd,
        };
        if self.extent.len() != want || self.extent.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::validation(format!(
                "{:?} phantom needs {want} positive extent value(s)",
                self.kind
            )));
        }
        if self.fg_intensity == self.bg_intensity {
            return Err(Error::validation("foreground and background intensities must differ"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::validation("noise sigma must be non-negative"));
        }
        for (a, &h) in self.half_extents().iter().enumerate() {
            let hi = (self.dims[a].max(1) - 1) as f64 * self.spacing[a];
            let c = self.center.axis(a);
            if c - h < 0.0 || c + h > hi {
                return Err(Error::validation(format!(
                    "phantom extends outside the grid on axis {a}"
                )));
            }
        }
        Ok(())
    }

    /// Analytic membership of a world point.
    pub fn contains(&self, p: Point) -> bool {
        let d = p - self.center;
        match self.kind {
            PhantomKind::Disc | PhantomKind::Sphere => d.norm_squared() <= self.extent[0].powi(2),
            PhantomKind::Rectangle | PhantomKind::Box => {
                self.extent.iter().enumerate().all(|(a, &h)| d.axis(a).abs() <= h)
            }
        }
    }
}

/// Renders a phantom and its exact ground-truth mask (voxel-center membership).
/// The origin is zero; noise is reproducible from `rng_seed`.
pub fn make_phantom(spec: &PhantomSpec, rng_seed: u64) -> Result<(ScalarGrid, Mask)> {
    spec.validate()?;
    let nd = spec.kind.ndim();
    let dims = spec.dims.clone();
    let n: usize = dims.iter().product();
    let mut labels = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let noise = Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::validation(format!("noise: {e}")))?;
    let zdim = if nd == 3 { dims[2] } else { 1 };
    for z in 0..zdim {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                let p = Point::new(
                    x as f64 * spec.spacing[0],
                    y as f64 * spec.spacing[1],
                    if nd == 3 { z as f64 * spec.spacing[2] } else { 0.0 },
                );
                let inside = spec.contains(p);
                labels.push(inside);
                let base = if inside { spec.fg_intensity } else { spec.bg_intensity };
                let v = if spec.noise_sigma > 0.0 {
                    base + noise.sample(&mut rng)
                } else {
                    base
                };
                values.push(v);
            }
        }
    }
    let grid = ScalarGrid::new(dims.clone(), spec.spacing.clone(), vec![0.0; nd], values)?;
    Ok((grid, Mask::new(dims, labels)?))
}
