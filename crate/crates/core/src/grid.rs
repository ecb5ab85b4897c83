//! Uniform periodic grids on the torus.

use crate::error::{Error, Result};

/// A square periodic grid: `dim` axes, `resolution` samples per axis,
/// period `length` per axis. All axes share resolution and length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    resolution: usize,
    length: f64,
}

impl Grid {
    /// 2D grid with period 2*pi.
    pub fn square(resolution: usize) -> Result<Self> {
        Self::new(2, resolution, std::f64::consts::TAU)
    }

    /// 3D grid with period 2*pi; intended for low resolutions.
    pub fn cube(resolution: usize) -> Result<Self> {
        Self::new(3, resolution, std::f64::consts::TAU)
    }

    pub fn new(dim: usize, resolution: usize, length: f64) -> Result<Self> {
        if !(dim == 2 || dim == 3) {
            return Err(Error::Config(format!("grid dimension must be 2 or 3, got {dim}")));
        }
        if resolution < 8 || !resolution.is_power_of_two() {
            return Err(Error::Config(format!(
                "grid resolution must be a power of two >= 8, got {resolution}"
            )));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::Config(format!("grid length must be positive, got {length}")));
        }
        Ok(Self { dim, resolution, length })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Total sample count `resolution^dim`.
    pub fn points(&self) -> usize {
        self.resolution.pow(self.dim as u32)
    }

    /// Grid spacing per axis.
    pub fn spacing(&self) -> f64 {
        self.length / self.resolution as f64
    }

    /// Quadrature weight of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Signed integer mode index for sample index `i` along one axis:
    /// 0, 1, ..., n/2-1, -n/2, ..., -1. The Nyquist slot maps to -n/2.
    pub fn mode_index(&self, i: usize) -> i64 {
        let n = self.resolution as i64;
        let i = i as i64;
        if i <= n / 2 - 1 {
            i
        } else {
            i - n
        }
    }

    /// Angular wavenumber of mode slot `i`: 2*pi*m/length.
    pub fn wavenumber(&self, i: usize) -> f64 {
        std::f64::consts::TAU * self.mode_index(i) as f64 / self.length
    }

    /// Wavenumber for spectral differentiation; the Nyquist mode is zeroed
    /// so d/dx stays exactly antisymmetric (real fields keep exact discrete
    /// summation by parts).
    pub fn deriv_wavenumber(&self, i: usize) -> f64 {
        if i == self.resolution / 2 {
            0.0
        } else {
            self.wavenumber(i)
        }
    }

    /// Physical coordinate of sample `i` along one axis.
    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    /// Decompose a flat row-major index into per-axis sample indices
    /// (slowest axis first).
    pub fn unravel(&self, mut idx: usize) -> [usize; 3] {
        let n = self.resolution;
        let mut out = [0usize; 3];
        for a in (0..self.dim).rev() {
            out[a] = idx % n;
            idx /= n;
        }
        out
    }

    /// Largest retained |mode| under the 2/3 dealiasing rule.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.resolution / 3) as i64
    }
}
