//! Scalar images and volumes, binary masks, file I/O and synthetic phantoms.

mod io;
mod phantom;

pub(crate) use io::png_from_gray8;
pub use io::{decode_grid, encode_grid, load_grid, load_grid_auto, load_mask, save_grid, save_mask, ImageFormat};
pub use phantom::{make_phantom, PhantomKind, PhantomSpec};

use crate::error::{Error, Result};
use crate::geom::Point;

/// A 2D or 3D scalar intensity field with physical voxel spacing.
///
/// Values are stored x-fastest. Voxel `(0,0[,0])` has its center at `origin`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    dims: Vec<usize>,
    spacing: Vec<f64>,
    origin: Vec<f64>,
    values: Vec<f64>,
}

impl ScalarGrid {
    pub fn new(dims: Vec<usize>, spacing: Vec<f64>, origin: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let nd = dims.len();
        if nd != 2 && nd != 3 {
            return Err(Error::validation(format!("grid must have 2 or 3 axes, got {nd}")));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::validation("every grid extent must be at least 1"));
        }
        if spacing.len() != nd || origin.len() != nd {
            return Err(Error::validation("spacing and origin must have one entry per axis"));
        }
        if spacing.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::validation("spacing entries must be positive"));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::validation("origin must be finite"));
        }
        let n: usize = dims.iter().product();
        if values.len() != n {
            return Err(Error::validation(format!(
                "expected {n} values for dims {dims:?}, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("intensities must be finite"));
        }
        Ok(Self {
            dims,
            spacing,
            origin,
            values,
        })
    }

    /// Grid with unit spacing and zero origin.
    pub fn with_unit_spacing(dims: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let nd = dims.len();
        Self::new(dims, vec![1.0; nd], vec![0.0; nd], values)
    }

    pub fn filled(dims: Vec<usize>, value: f64) -> Result<Self> {
        let n = dims.iter().product();
        Self::with_unit_spacing(dims, vec![value; n])
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index(&self, idx: [usize; 3]) -> usize {
        let z = if self.ndim() == 3 { idx[2] } else { 0 };
        idx[0] + self.dims[0] * (idx[1] + self.dims[1] * z)
    }

    pub fn get(&self, idx: [usize; 3]) -> f64 {
        self.values[self.index(idx)]
    }

    /// World position of a voxel center.
    pub fn voxel_center(&self, idx: [usize; 3]) -> Point {
        let c = |a: usize| self.origin[a] + idx[a] as f64 * self.spacing[a];
        if self.ndim() == 3 {
            Point::new(c(0), c(1), c(2))
        } else {
            Point::xy(c(0), c(1))
        }
    }

    /// Continuous voxel coordinate of a world point along one axis (unclamped).
    pub fn continuous_index(&self, p: Point, axis: usize) -> f64 {
        (p.axis(axis) - self.origin[axis]) / self.spacing[axis]
    }

    /// Axis-aligned world extent covered by voxel centers, per axis `(lo, hi)`.
    pub fn world_bounds(&self) -> Vec<(f64, f64)> {
        (0..self.ndim())
            .map(|a| {
                (
                    self.origin[a],
                    self.origin[a] + (self.dims[a] - 1) as f64 * self.spacing[a],
                )
            })
            .collect()
    }

    /// Intensity at a world point: bilinear (2D) or trilinear (3D) in world
    /// space, with coordinates clamped to the voxel-center extent.
    pub fn sample_at(&self, p: Point) -> f64 {
        let nd = self.ndim();
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for a in 0..nd {
            let hi = (self.dims[a] - 1) as f64;
            let u = self.continuous_index(p, a);
            let u = if u.is_nan() { 0.0 } else { u.clamp(0.0, hi) };
            if self.dims[a] == 1 {
                continue;
            }
            let i0 = (u.floor() as usize).min(self.dims[a] - 2);
            base[a] = i0;
            frac[a] = u - i0 as f64;
        }
        let step = |a: usize| usize::from(self.dims[a] > 1);
        if nd == 2 {
            let (x0, y0) = (base[0], base[1]);
            let (x1, y1) = (x0 + step(0), y0 + step(1));
            let (fx, fy) = (frac[0], frac[1]);
            let v00 = self.get([x0, y0, 0]);
            let v10 = self.get([x1, y0, 0]);
            let v01 = self.get([x0, y1, 0]);
            let v11 = self.get([x1, y1, 0]);
            let a = v00 * (1.0 - fx) + v10 * fx;
            let b = v01 * (1.0 - fx) + v11 * fx;
            a * (1.0 - fy) + b * fy
        } else {
            let (x0, y0, z0) = (base[0], base[1], base[2]);
            let (x1, y1, z1) = (x0 + step(0), y0 + step(1), z0 + step(2));
            let (fx, fy, fz) = (frac[0], frac[1], frac[2]);
            let lerp_x = |y: usize, z: usize| self.get([x0, y, z]) * (1.0 - fx) + self.get([x1, y, z]) * fx;
            let a = lerp_x(y0, z0) * (1.0 - fy) + lerp_x(y1, z0) * fy;
            let b = lerp_x(y0, z1) * (1.0 - fy) + lerp_x(y1, z1) * fy;
            a * (1.0 - fz) + b * fz
        }
    }

    /// New grid with the same geometry and every value mapped through `f`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.dims.clone(),
            self.spacing.clone(),
            self.origin.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// 8-bit display rendering of one axis-aligned slice, min/max windowed over
    /// the whole grid. Returns `(width, height, pixels)`; for 2D grids only
    /// `axis == 2, index == 0` is valid.
    pub fn render_slice(&self, axis: usize, index: usize) -> Result<(usize, usize, Vec<u8>)> {
        let nd = self.ndim();
        let (zdim, ok_axis) = if nd == 2 {
            (1, axis == 2)
        } else {
            (self.dims[2], axis < 3)
        };
        if !ok_axis {
            return Err(Error::validation(format!("axis {axis} invalid for {nd}D grid")));
        }
        let extent = [self.dims[0], self.dims[1], zdim];
        if index >= extent[axis] {
            return Err(Error::validation(format!(
                "slice index {index} out of range 0..{}",
                extent[axis]
            )));
        }
        let (u_axis, v_axis) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let (w, h) = (extent[u_axis], extent[v_axis]);
        let (lo, hi) = self.min_max();
        let scale = if hi > lo { 255.0 / (hi - lo) } else { 0.0 };
        let mut out = Vec::with_capacity(w * h);
        for v in 0..h {
            for u in 0..w {
                let mut idx = [0usize; 3];
                idx[axis] = index;
                idx[u_axis] = u;
                idx[v_axis] = v;
                let val = (self.get(idx) - lo) * scale;
                out.push(val.round().clamp(0.0, 255.0) as u8);
            }
        }
        Ok((w, h, out))
    }
}

/// Binary per-voxel labeling, x-fastest like [`ScalarGrid`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    dims: Vec<usize>,
    labels: Vec<bool>,
}

impl Mask {
    pub fn new(dims: Vec<usize>, labels: Vec<bool>) -> Result<Self> {
        if dims.len() != 2 && dims.len() != 3 {
            return Err(Error::validation("mask must have 2 or 3 axes"));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::validation("every mask extent must be at least 1"));
        }
        let n: usize = dims.iter().product();
        if labels.len() != n {
            return Err(Error::validation(format!(
                "expected {n} labels for dims {dims:?}, got {}",
                labels.len()
            )));
        }
        Ok(Self { dims, labels })
    }

    pub fn empty(dims: Vec<usize>) -> Result<Self> {
        let n = dims.iter().product();
        Self::new(dims, vec![false; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn index(&self, idx: [usize; 3]) -> usize {
        let z = if self.dims.len() == 3 { idx[2] } else { 0 };
        idx[0] + self.dims[0] * (idx[1] + self.dims[1] * z)
    }

    pub fn get(&self, idx: [usize; 3]) -> bool {
        self.labels[self.index(idx)]
    }

    pub fn set(&mut self, idx: [usize; 3], value: bool) {
        let i = self.index(idx);
        self.labels[i] = value;
    }

    pub fn count(&self) -> usize {
        self.labels.iter().filter(|&&b| b).count()
    }
}
