//! Mollifier kernels and space/time/space-time convolutions.
//!
//! Kernels are even, nonnegative, supported in radius epsilon, and carry
//! exact discrete unit mass: the sampled weights are normalized after
//! discretization, so constants are fixed points of mollification to
//! round-off. Spatial convolution is performed spectrally (a real, even
//! transfer function), which makes it the exact discrete circular
//! convolution with the sampled kernel and the exact adjoint of itself.

use crate::error::{Error, Result};
use crate::exec;
use crate::field::{PeriodicField, SpectralField};
use crate::flow::{FlowState, FlowTrajectory};
use crate::grid::Grid;
use crate::scaling::{self, ScalingReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelShape {
    /// exp(-1/(1-s^2)) for |s| < 1, the classical compactly supported bump.
    CompactBump,
    /// Gaussian with sigma = 1/3, truncated at |s| = 1.
    TruncatedGaussian,
}

impl KernelShape {
    /// 1D profile at normalized radius `s`.
    pub fn profile(&self, s: f64) -> f64 {
        let s2 = s * s;
        if s2 >= 1.0 {
            return 0.0;
        }
        match self {
            KernelShape::CompactBump => (-1.0 / (1.0 - s2)).exp(),
            KernelShape::TruncatedGaussian => (-4.5 * s2).exp(),
        }
    }

    /// Derivative of the 1D profile.
    pub fn profile_deriv(&self, s: f64) -> f64 {
        let s2 = s * s;
        if s2 >= 1.0 {
            return 0.0;
        }
        match self {
            KernelShape::CompactBump => {
                let d = 1.0 - s2;
                self.profile(s) * (-2.0 * s / (d * d))
            }
            KernelShape::TruncatedGaussian => self.profile(s) * (-9.0 * s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelAxes {
    Space,
    Time,
    SpaceTime,
}

/// Discrete time-convolution stencil at snapshot spacing `dt`.
#[derive(Debug, Clone)]
pub struct TimeTaps {
    pub dt: f64,
    /// Taps run over offsets -radius..=radius.
    pub radius: usize,
    /// Unit-mass weights.
    pub weights: Vec<f64>,
    /// Derivative weights: zero-sum, normalized so that convolving the
    /// linear function t reproduces slope 1 exactly.
    pub dweights: Vec<f64>,
}

impl TimeTaps {
    pub fn build(shape: KernelShape, epsilon: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || dt > epsilon / 4.0 + 1e-12 * epsilon {
            return Err(Error::TimeSamplingTooCoarse {
                dt,
                limit: epsilon / 4.0,
            });
        }
        let radius = (epsilon / dt).floor() as usize;
        let mut weights: Vec<f64> = (-(radius as i64)..=radius as i64)
            .map(|i| shape.profile(i as f64 * dt / epsilon))
            .collect();
        let mass: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= mass;
        }
        let mut dweights: Vec<f64> = (-(radius as i64)..=radius as i64)
            .map(|i| -shape.profile_deriv(i as f64 * dt / epsilon))
            .collect();
        // convolving f(t) = t must yield derivative 1:
        // sum_k d_k * (k - radius) * dt = 1
        let moment: f64 = dweights
            .iter()
            .enumerate()
            .map(|(k, &d)| d * (k as f64 - radius as f64) * dt)
            .sum();
        for d in &mut dweights {
            *d /= moment;
        }
        Ok(Self {
            dt,
            radius,
            weights,
            dweights,
        })
    }

    pub fn len(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Discrete mollifier eta_epsilon.
#[derive(Debug, Clone)]
pub struct MollifierKernel {
    pub shape: KernelShape,
    pub epsilon: f64,
    pub axes: KernelAxes,
    space: Option<SpaceKernel>,
}

#[derive(Debug, Clone)]
struct SpaceKernel {
    samples: PeriodicField,
    transfer: Vec<f64>,
}

/// Construct a kernel. Spatial kernels need `epsilon >= 2 * grid spacing`.
pub fn make_kernel(
    shape: KernelShape,
    epsilon: f64,
    axes: KernelAxes,
    grid: &Grid,
) -> Result<MollifierKernel> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::Config(format!("kernel radius must be positive, got {epsilon}")));
    }
    let space = match axes {
        KernelAxes::Time => None,
        KernelAxes::Space | KernelAxes::SpaceTime => {
            let minimum = 2.0 * grid.spacing();
            if epsilon < minimum {
                return Err(Error::EpsilonUnderResolved { epsilon, minimum });
            }
            Some(build_space_kernel(shape, epsilon, grid))
        }
    };
    Ok(MollifierKernel {
        shape,
        epsilon,
        axes,
        space,
    })
}

fn build_space_kernel(shape: KernelShape, epsilon: f64, grid: &Grid) -> SpaceKernel {
    // wrapped coordinates from signed integer indices so that the discrete
    // stencil is even to the last bit
    let h = grid.spacing();
    let mut samples = PeriodicField::zeros(*grid, 1);
    let g = *grid;
    exec::for_each_chunk_mut(samples.data_mut(), exec::SUM_CHUNK, |chunk_idx, chunk| {
        let base = chunk_idx * exec::SUM_CHUNK;
        for (off, v) in chunk.iter_mut().enumerate() {
            let ids = g.unravel(base + off);
            let mut r2 = 0.0;
            for &i in ids.iter().take(g.dim()) {
                let w = g.mode_index(i) as f64 * h;
                r2 += w * w;
            }
            *v = shape.profile(r2.sqrt() / epsilon);
        }
    });
    let mass = grid.cell_volume() * exec::sum(samples.data());
    let samples = samples.scaled(1.0 / mass);
    // transfer(k) = L^N * eta_hat(k); real by evenness
    let spec = samples.to_spectral();
    let vol = grid.length().powi(grid.dim() as i32);
    let transfer: Vec<f64> = spec.component(0).iter().map(|c| c.re * vol).collect();
    SpaceKernel { samples, transfer }
}

impl MollifierKernel {
    /// The sampled kernel weights (unit discrete mass).
    pub fn samples(&self) -> Option<&PeriodicField> {
        self.space.as_ref().map(|s| &s.samples)
    }

    pub fn transfer(&self) -> Option<&[f64]> {
        self.space.as_ref().map(|s| s.transfer.as_slice())
    }

    pub fn has_space(&self) -> bool {
        self.space.is_some()
    }

    pub fn has_time(&self) -> bool {
        matches!(self.axes, KernelAxes::Time | KernelAxes::SpaceTime)
    }

    /// Time stencil for a trajectory sampled at spacing `dt`.
    pub fn time_taps(&self, dt: f64) -> Result<TimeTaps> {
        TimeTaps::build(self.shape, self.epsilon, dt)
    }

    /// Apply the spatial transfer in place.
    pub fn apply_space(&self, spec: &mut SpectralField) {
        let kernel = self
            .space
            .as_ref()
            .expect("kernel has no spatial part");
        let points = spec.grid().points();
        let components = spec.components();
        let transfer = &kernel.transfer;
        let data = spec.data_mut();
        for c in 0..components {
            let block = &mut data[c * points..(c + 1) * points];
            exec::for_each_chunk_mut(block, exec::SUM_CHUNK, |i, chunk| {
                let base = i * exec::SUM_CHUNK;
                for (off, v) in chunk.iter_mut().enumerate() {
                    *v *= transfer[base + off];
                }
            });
        }
    }
}

/// Spatial mollification f^eps = eta_eps * f.
pub fn mollify_space(field: &PeriodicField, kernel: &MollifierKernel) -> Result<PeriodicField> {
    if kernel.space.is_none() {
        return Err(Error::Config("mollify_space needs a spatial kernel".into()));
    }
    let mut spec = field.to_spectral();
    kernel.apply_space(&mut spec);
    Ok(spec.to_physical())
}

/// Space-time (or pure-time) mollification of a trajectory. The output time
/// range shrinks to the interior (t0 + eps, t1 - eps).
pub fn mollify_trajectory(
    traj: &FlowTrajectory,
    kernel: &MollifierKernel,
) -> Result<FlowTrajectory> {
    if !kernel.has_time() {
        // pure spatial smoothing, no interior restriction
        return traj.map_states(|s| FlowState {
            rho: mollify_space(&s.rho, kernel).expect("spatial kernel"),
            u: mollify_space(&s.u, kernel).expect("spatial kernel"),
            p: mollify_space(&s.p, kernel).expect("spatial kernel"),
            t: s.t,
        });
    }
    let taps = kernel.time_taps(traj.time_step())?;
    let r = taps.radius;
    if traj.len() < 2 * r + 2 {
        return Err(Error::TrajectoryTooShort(format!(
            "need more than {} snapshots for eps = {}",
            2 * r + 1,
            kernel.epsilon
        )));
    }
    // spatially mollify once per snapshot, then window-sum in time
    let smoothed: Vec<FlowState> = (0..traj.len())
        .map(|i| {
            let s = traj.state(i);
            if kernel.has_space() {
                FlowState {
                    rho: mollify_space(&s.rho, kernel).expect("spatial kernel"),
                    u: mollify_space(&s.u, kernel).expect("spatial kernel"),
                    p: mollify_space(&s.p, kernel).expect("spatial kernel"),
                    t: s.t,
                }
            } else {
                s.clone()
            }
        })
        .collect();
    let mut out = Vec::new();
    for i in r..traj.len() - r {
        let mut rho = PeriodicField::zeros(*traj.grid(), 1);
        let mut u = PeriodicField::zeros(*traj.grid(), traj.grid().dim());
        let mut p = PeriodicField::zeros(*traj.grid(), 1);
        for (k, &w) in taps.weights.iter().enumerate() {
            let j = i + k - r;
            rho.axpy(w, &smoothed[j].rho);
            u.axpy(w, &smoothed[j].u);
            p.axpy(w, &smoothed[j].p);
        }
        out.push(FlowState {
            rho,
            u,
            p,
            t: traj.state(i).t,
        });
    }
    FlowTrajectory::from_states(out)
}

/// Report pair for the two classical mollifier estimates.
#[derive(Debug, Clone)]
pub struct MollifierRateReport {
    /// ||w^eps - w||_p vs eps; predicted slope alpha (or better).
    pub convergence: ScalingReport,
    /// ||grad w^eps||_p vs eps; predicted slope alpha - 1 (no worse).
    pub gradient: ScalingReport,
}

impl MollifierRateReport {
    pub fn passed(&self) -> bool {
        !self.convergence.verdict.failed() && !self.gradient.verdict.failed()
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("epsilon,quantity,value\n");
        s.push_str(&self.convergence.csv_rows());
        s.push_str(&self.gradient.csv_rows());
        s
    }
}

/// Measure the mollifier rates on one field: the convergence slope should
/// be at least `alpha`, and the gradient growth no worse than
/// `eps^(alpha-1)`.
pub fn mollifier_rate_check(
    field: &PeriodicField,
    alpha: f64,
    p: f64,
    eps_list: &[f64],
    shape: KernelShape,
    tolerance: f64,
) -> Result<MollifierRateReport> {
    scaling::check_sweep_geometry(eps_list, 4)?;
    let grid = *field.grid();
    let spec = field.to_spectral();
    let rows: Vec<(f64, f64, f64)> = {
        let evaluated: Vec<Result<(f64, f64, f64)>> = exec::map_indexed(eps_list.len(), |i| {
            let eps = eps_list[i];
            let kernel = make_kernel(shape, eps, KernelAxes::Space, &grid)?;
            let mut smooth = spec.clone();
            kernel.apply_space(&mut smooth);
            let smooth_phys = smooth.to_physical();
            let diff = smooth_phys.sub(field).lp_norm(p)?;
            let mut grad_sq = 0.0;
            let grad_norm = if field.is_scalar() {
                let g = smooth_phys.gradient()?;
                g.lp_norm(p)?
            } else {
                // componentwise gradients stacked by Euclidean magnitude
                for c in 0..field.components() {
                    let g = smooth_phys.extract(c).gradient()?.lp_norm(p)?;
                    grad_sq += g * g;
                }
                grad_sq.sqrt()
            };
            Ok((eps, diff, grad_norm))
        });
        let mut rows = Vec::with_capacity(evaluated.len());
        for r in evaluated {
            rows.push(r?);
        }
        rows
    };
    let diff_points: Vec<(f64, f64)> = rows.iter().map(|&(e, d, _)| (e, d)).collect();
    let grad_points: Vec<(f64, f64)> = rows.iter().map(|&(e, _, g)| (e, g)).collect();
    let convergence = scaling::build_report_graded("mollify-convergence", diff_points, alpha, tolerance);
    let gradient = scaling::build_report_graded("mollify-gradient", grad_points, alpha - 1.0, tolerance);
    Ok(MollifierRateReport {
        convergence,
        gradient,
    })
}
