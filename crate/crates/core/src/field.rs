//! Periodic scalar/vector sample fields and their spectral calculus.
//!
//! A [`PeriodicField`] stores real samples, row-major with the last axis
//! fastest, one block per component. All calculus (derivatives, exact
//! translations, dealiasing, mollification) happens in the discrete Fourier
//! representation of [`SpectralField`], where the operations are diagonal.
//!
//! Discrete conventions that the rest of the crate relies on:
//! - the forward transform is mean-normalized (zero mode = field mean),
//! - differentiation zeroes the Nyquist mode, which keeps the rectangle
//!   rule exactly compatible with summation by parts,
//! - translations multiply by `exp(i k.xi)` and are exact for band-limited
//!   data, including non-grid-aligned offsets.

use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::exec;
use crate::fft;
use crate::grid::Grid;

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicField {
    grid: Grid,
    components: usize,
    data: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Grid,
    components: usize,
    data: Vec<Complex<f64>>,
}

impl PeriodicField {
    pub fn zeros(grid: Grid, components: usize) -> Self {
        assert!(components == 1 || components == grid.dim());
        Self {
            grid,
            components,
            data: vec![0.0; components * grid.points()],
        }
    }

    pub fn constant(grid: Grid, components: usize, value: f64) -> Self {
        let mut f = Self::zeros(grid, components);
        f.data.fill(value);
        f
    }

    /// Scalar field sampled from physical coordinates. 2D closures receive
    /// `[x, y, 0.0]`.
    pub fn from_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn([f64; 3]) -> f64 + Sync + Send,
    {
        Self::from_fn_vec(grid, 1, |x, _| f(x))
    }

    pub fn from_fn_vec<F>(grid: Grid, components: usize, f: F) -> Self
    where
        F: Fn([f64; 3], usize) -> f64 + Sync + Send,
    {
        assert!(components == 1 || components == grid.dim());
        let points = grid.points();
        let mut field = Self::zeros(grid, components);
        for c in 0..components {
            let block = field.component_mut(c);
            exec::for_each_chunk_mut(block, exec::SUM_CHUNK, |chunk_idx, chunk| {
                let base = chunk_idx * exec::SUM_CHUNK;
                for (off, v) in chunk.iter_mut().enumerate() {
                    let idx = base + off;
                    let ids = grid.unravel(idx);
                    let mut x = [0.0; 3];
                    for a in 0..grid.dim() {
                        x[a] = grid.coord(ids[a]);
                    }
                    *v = f(x, c);
                }
            });
            let _ = points;
        }
        field
    }

    pub fn from_data(grid: Grid, components: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != components * grid.points() {
            return Err(Error::Config(format!(
                "data length {} does not match {} components on {} points",
                data.len(),
                components,
                grid.points()
            )));
        }
        Ok(Self { grid, components, data })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn is_scalar(&self) -> bool {
        self.components == 1
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let points = self.grid.points();
        &self.data[c * points..(c + 1) * points]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let points = self.grid.points();
        &mut self.data[c * points..(c + 1) * points]
    }

    pub fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(
                self.grid.resolution(),
                other.grid.resolution(),
            ));
        }
        Ok(())
    }

    /// Forward transform (mean-normalized).
    pub fn to_spectral(&self) -> SpectralField {
        let mut data: Vec<Complex<f64>> =
            self.data.iter().map(|&v| Complex::new(v, 0.0)).collect();
        fft::ndfft(&mut data, self.grid.resolution(), self.grid.dim(), true);
        SpectralField {
            grid: self.grid,
            components: self.components,
            data,
        }
    }

    /// Spectral derivative along `axis`.
    pub fn derivative(&self, axis: usize) -> Result<Self> {
        Ok(self.to_spectral().derivative(axis)?.to_physical())
    }

    /// Gradient of a scalar field: `dim` components.
    pub fn gradient(&self) -> Result<Self> {
        assert!(self.is_scalar(), "gradient takes a scalar field");
        let spec = self.to_spectral();
        let mut out = Self::zeros(self.grid, self.grid.dim());
        for a in 0..self.grid.dim() {
            let d = spec.derivative(a)?.to_physical();
            out.component_mut(a).copy_from_slice(d.component(0));
        }
        Ok(out)
    }

    /// Divergence of a vector field.
    pub fn divergence(&self) -> Result<Self> {
        assert_eq!(self.components, self.grid.dim(), "divergence takes a vector field");
        let points = self.grid.points();
        let mut acc = vec![0.0; points];
        for a in 0..self.grid.dim() {
            let comp = Self::from_data(self.grid, 1, self.component(a).to_vec())?;
            let d = comp.derivative(a)?;
            let dc = d.component(0);
            exec::for_each_chunk_mut(&mut acc, exec::SUM_CHUNK, |i, chunk| {
                let base = i * exec::SUM_CHUNK;
                for (off, v) in chunk.iter_mut().enumerate() {
                    *v += dc[base + off];
                }
            });
        }
        Self::from_data(self.grid, 1, acc)
    }

    /// 2D perpendicular gradient of a scalar: `(-d/dy, d/dx)`; exactly
    /// divergence-free by construction.
    pub fn perp_gradient(&self) -> Result<Self> {
        assert!(self.is_scalar());
        if self.grid.dim() != 2 {
            return Err(Error::Config("perp_gradient is 2D only".into()));
        }
        let g = self.gradient()?;
        let mut out = Self::zeros(self.grid, 2);
        for (v, s) in out.component_mut(0).iter_mut().zip(g.component(1)) {
            *v = -s;
        }
        out.component_mut(1).copy_from_slice(g.component(0));
        Ok(out)
    }

    /// Exact spectral translation: returns `w(. + xi)`. `xi` need not be a
    /// grid multiple; periodic wrap is implicit.
    pub fn shift(&self, xi: &[f64]) -> Self {
        assert_eq!(xi.len(), self.grid.dim());
        self.to_spectral().shifted(xi).to_physical()
    }

    /// Cyclic sample rotation by integer offsets: `out(x) = in(x + s*h)`.
    pub fn rotate(&self, offsets: &[i64]) -> Self {
        assert_eq!(offsets.len(), self.grid.dim());
        let n = self.grid.resolution() as i64;
        let dim = self.grid.dim();
        let points = self.grid.points();
        let mut out = Self::zeros(self.grid, self.components);
        for c in 0..self.components {
            let src = self.component(c);
            let dst = out.component_mut(c);
            exec::for_each_chunk_mut(dst, exec::SUM_CHUNK, |chunk_idx, chunk| {
                let base = chunk_idx * exec::SUM_CHUNK;
                for (off, v) in chunk.iter_mut().enumerate() {
                    let ids = self.grid.unravel(base + off);
                    let mut src_idx = 0usize;
                    for a in 0..dim {
                        let shifted = (ids[a] as i64 + offsets[a]).rem_euclid(n) as usize;
                        src_idx = src_idx * n as usize + shifted;
                    }
                    *v = src[src_idx];
                }
            });
            let _ = points;
        }
        out
    }

    /// 2/3-rule spectral truncation; idempotent.
    pub fn dealias(&self) -> Self {
        self.to_spectral().dealiased().to_physical()
    }

    fn magnitude_at(&self, i: usize) -> f64 {
        if self.components == 1 {
            self.data[i].abs()
        } else {
            let points = self.grid.points();
            let mut s = 0.0;
            for c in 0..self.components {
                let v = self.data[c * points + i];
                s += v * v;
            }
            s.sqrt()
        }
    }

    /// Rectangle-rule L^p norm (pointwise Euclidean magnitude for vector
    /// fields). `p = f64::INFINITY` returns the grid maximum.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if p.is_infinite() && p > 0.0 {
            let points = self.grid.points();
            let partials =
                exec::map_indexed(points.div_ceil(exec::SUM_CHUNK), |b| {
                    let lo = b * exec::SUM_CHUNK;
                    let hi = (lo + exec::SUM_CHUNK).min(points);
                    let mut m = 0.0f64;
                    for i in lo..hi {
                        m = m.max(self.magnitude_at(i));
                    }
                    m
                });
            return Ok(partials.into_iter().fold(0.0, f64::max));
        }
        if !(p >= 1.0) {
            return Err(Error::InvalidLpExponent(p));
        }
        let points = self.grid.points();
        let total = if (p - 2.0).abs() < 1e-14 {
            exec::sum_with(points, |i| {
                let m = self.magnitude_at(i);
                m * m
            })
        } else if (p - 1.0).abs() < 1e-14 {
            exec::sum_with(points, |i| self.magnitude_at(i))
        } else {
            exec::sum_with(points, |i| self.magnitude_at(i).powf(p))
        };
        Ok((self.grid.cell_volume() * total).powf(1.0 / p))
    }

    /// Rectangle-rule inner product; components are paired.
    pub fn inner_product(&self, other: &Self) -> Result<f64> {
        self.same_grid(other)?;
        if self.components != other.components {
            return Err(Error::Config(format!(
                "inner product of {}-component and {}-component fields",
                self.components, other.components
            )));
        }
        Ok(self.grid.cell_volume() * exec::dot(&self.data, &other.data))
    }

    pub fn max_abs(&self) -> f64 {
        exec::max_abs(&self.data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self + a * other`, in place.
    pub fn axpy(&mut self, a: f64, other: &Self) {
        debug_assert_eq!(self.data.len(), other.data.len());
        let src = &other.data;
        exec::for_each_chunk_mut(&mut self.data, exec::SUM_CHUNK, |i, chunk| {
            let base = i * exec::SUM_CHUNK;
            for (off, v) in chunk.iter_mut().enumerate() {
                *v += a * src[base + off];
            }
        });
    }

    pub fn scale(&mut self, a: f64) {
        exec::for_each_chunk_mut(&mut self.data, exec::SUM_CHUNK, |_, chunk| {
            for v in chunk {
                *v *= a;
            }
        });
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    /// Pointwise product of two scalar fields.
    pub fn mul_pointwise(&self, other: &Self) -> Self {
        debug_assert!(self.is_scalar() && other.is_scalar());
        let mut out = self.clone();
        let src = &other.data;
        exec::for_each_chunk_mut(&mut out.data, exec::SUM_CHUNK, |i, chunk| {
            let base = i * exec::SUM_CHUNK;
            for (off, v) in chunk.iter_mut().enumerate() {
                *v *= src[base + off];
            }
        });
        out
    }

    /// Extract one component as a scalar field.
    pub fn extract(&self, c: usize) -> Self {
        Self::from_data(self.grid, 1, self.component(c).to_vec()).expect("component extract")
    }
}

impl SpectralField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn data(&self) -> &[Complex<f64>] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex<f64>] {
        &mut self.data
    }

    pub fn component(&self, c: usize) -> &[Complex<f64>] {
        let points = self.grid.points();
        &self.data[c * points..(c + 1) * points]
    }

    /// Inverse transform; the imaginary residue of real-field pipelines is
    /// discarded.
    pub fn to_physical(&self) -> PeriodicField {
        let mut data = self.data.clone();
        fft::ndfft(&mut data, self.grid.resolution(), self.grid.dim(), false);
        PeriodicField {
            grid: self.grid,
            components: self.components,
            data: data.iter().map(|v| v.re).collect(),
        }
    }

    /// Multiply every coefficient by `factor(mode slots)`.
    pub fn apply_mode_factor<F>(&mut self, factor: F)
    where
        F: Fn(&[usize]) -> Complex<f64> + Sync + Send,
    {
        let grid = self.grid;
        let points = grid.points();
        let dim = grid.dim();
        for c in 0..self.components {
            let block = &mut self.data[c * points..(c + 1) * points];
            exec::for_each_chunk_mut(block, exec::SUM_CHUNK, |chunk_idx, chunk| {
                let base = chunk_idx * exec::SUM_CHUNK;
                for (off, v) in chunk.iter_mut().enumerate() {
                    let ids = grid.unravel(base + off);
                    *v *= factor(&ids[..dim]);
                }
            });
        }
    }

    pub fn derivative(&self, axis: usize) -> Result<Self> {
        if axis >= self.grid.dim() {
            return Err(Error::AxisOutOfRange {
                axis,
                dim: self.grid.dim(),
            });
        }
        let grid = self.grid;
        let mut out = self.clone();
        out.apply_mode_factor(|ids| Complex::new(0.0, grid.deriv_wavenumber(ids[axis])));
        Ok(out)
    }

    pub fn shifted(&self, xi: &[f64]) -> Self {
        let grid = self.grid;
        let n = grid.resolution();
        let dim = grid.dim();
        // per-axis phase tables
        let mut phases: Vec<Vec<Complex<f64>>> = Vec::with_capacity(dim);
        for a in 0..dim {
            phases.push(
                (0..n)
                    .map(|i| Complex::from_polar(1.0, grid.wavenumber(i) * xi[a]))
                    .collect(),
            );
        }
        let mut out = self.clone();
        out.apply_mode_factor(|ids| {
            let mut f = Complex::new(1.0, 0.0);
            for (a, &i) in ids.iter().enumerate() {
                f *= phases[a][i];
            }
            f
        });
        out
    }

    pub fn dealiased(&self) -> Self {
        let grid = self.grid;
        let cutoff = grid.dealias_cutoff();
        let mut out = self.clone();
        out.apply_mode_factor(|ids| {
            if ids.iter().any(|&i| grid.mode_index(i).abs() > cutoff) {
                Complex::new(0.0, 0.0)
            } else {
                Complex::new(1.0, 0.0)
            }
        });
        out
    }

    /// Cell-volume-weighted spectral energy: `L^N * sum |c_k|^2`, the
    /// Parseval partner of `lp_norm(., 2)^2`.
    pub fn spectral_energy(&self) -> f64 {
        let vol = self.grid.length().powi(self.grid.dim() as i32);
        vol * exec::sum_with(self.data.len(), |i| self.data[i].norm_sqr())
    }
}
