//! 2D pseudo-spectral integrator for density-dependent incompressible flow
//! with a variable-coefficient pressure projection.
//!
//! Time stepping uses the advective form (rho_t = -u.grad rho,
//! u_t = -(u.grad)u - grad P / rho) with classical RK4, 2/3-rule dealiased
//! products, and a projection applied to every stage tendency so stage
//! velocities stay divergence-free. The projection solves
//! div((1/rho) grad P) = div(u*) by Richardson iteration preconditioned
//! with the constant-coefficient inverse Laplacian; the constant is the
//! midpoint of 1/rho, which makes the iteration a contraction with factor
//! (b_max - b_min) / (b_max + b_min).

use std::path::PathBuf;

use rustfft::num_complex::Complex;

use crate::energy;
use crate::error::{Error, Result};
use crate::exec;
use crate::field::PeriodicField;
use crate::flow::{FlowState, FlowTrajectory};
use crate::grid::Grid;
use crate::synth;

#[derive(Debug, Clone, Copy)]
pub struct ProjectionSettings {
    pub tolerance: f64,
    pub max_iters: usize,
}

impl Default for ProjectionSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-11,
            max_iters: 500,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Projection {
    pub u: PeriodicField,
    pub p: PeriodicField,
    pub residual: f64,
    pub iterations: usize,
}

/// Pressure projector with a warm-started iteration state.
pub struct Projector {
    grid: Grid,
    settings: ProjectionSettings,
    rho_min: f64,
    /// -1/|k|^2 with the zero mode (and Nyquist lines) zeroed.
    inv_lap: Vec<f64>,
    warm: Option<Vec<Complex<f64>>>,
}

impl Projector {
    pub fn new(grid: Grid, settings: ProjectionSettings, rho_min: f64) -> Self {
        let n = grid.resolution();
        let mut inv_lap = vec![0.0; grid.points()];
        for (idx, v) in inv_lap.iter_mut().enumerate() {
            let ids = grid.unravel(idx);
            let mut k2 = 0.0;
            for &i in ids.iter().take(grid.dim()) {
                let k = grid.deriv_wavenumber(i);
                k2 += k * k;
            }
            *v = if k2 > 0.0 { -1.0 / k2 } else { 0.0 };
            let _ = n;
        }
        Self {
            grid,
            settings,
            rho_min,
            inv_lap,
            warm: None,
        }
    }

    /// Solve div((1/rho) grad P) = div(u_star), return u = u_star -
    /// (1/rho) grad P and the zero-mean pressure.
    pub fn project(&mut self, rho: &PeriodicField, u_star: &PeriodicField) -> Result<Projection> {
        rho.same_grid(u_star)?;
        let grid = self.grid;
        let points = grid.points();
        let min_rho = rho.component(0).iter().cloned().fold(f64::INFINITY, f64::min);
        if min_rho < self.rho_min {
            return Err(Error::DensityFloor {
                t: f64::NAN,
                min_rho,
                floor: self.rho_min,
            });
        }
        let b: Vec<f64> = rho.component(0).iter().map(|&r| 1.0 / r).collect();
        let b_max = b.iter().cloned().fold(0.0f64, f64::max);
        let b_min = b.iter().cloned().fold(f64::INFINITY, f64::min);
        let b0 = 0.5 * (b_min + b_max);

        let rhs_spec = u_star.divergence()?.to_spectral();
        let rhs_hat = rhs_spec.component(0).to_vec();
        let vol = grid.length().powi(grid.dim() as i32);
        let rhs_norm = (vol * exec::sum_with(points, |i| rhs_hat[i].norm_sqr())).sqrt();
        let tol = self.settings.tolerance * rhs_norm.max(1.0);

        // constant-density fast path: single Poisson solve
        if (b_max - b_min) <= 1e-13 * b0 {
            let mut p_hat = rhs_hat.clone();
            for (v, &il) in p_hat.iter_mut().zip(self.inv_lap.iter()) {
                *v *= il / b0;
            }
            let (u, p, residual) = self.assemble(rho, u_star, &p_hat, &b)?;
            return Ok(Projection {
                u,
                p,
                residual,
                iterations: 1,
            });
        }

        let mut p_hat = self
            .warm
            .take()
            .filter(|w| w.len() == points)
            .unwrap_or_else(|| vec![Complex::new(0.0, 0.0); points]);

        let mut iterations = 0;
        let mut residual = f64::INFINITY;
        while iterations < self.settings.max_iters {
            // r = rhs - div(b grad P)
            let r_hat = self.operator_residual(&p_hat, &b, &rhs_hat)?;
            residual = (vol * exec::sum_with(points, |i| r_hat[i].norm_sqr())).sqrt();
            if residual <= tol {
                break;
            }
            for ((p, &r), &il) in p_hat.iter_mut().zip(r_hat.iter()).zip(self.inv_lap.iter()) {
                *p += r * il / b0;
            }
            p_hat[0] = Complex::new(0.0, 0.0);
            iterations += 1;
        }
        if residual > tol {
            return Err(Error::ProjectionDiverged {
                iters: iterations,
                residual,
            });
        }
        self.warm = Some(p_hat.clone());
        let (u, p, res) = self.assemble(rho, u_star, &p_hat, &b)?;
        Ok(Projection {
            u,
            p,
            residual: res,
            iterations,
        })
    }

    /// rhs - div(b grad P) in spectral space.
    fn operator_residual(
        &self,
        p_hat: &[Complex<f64>],
        b: &[f64],
        rhs_hat: &[Complex<f64>],
    ) -> Result<Vec<Complex<f64>>> {
        let grid = self.grid;
        let div_hat = self.div_b_grad(p_hat, b)?;
        let points = grid.points();
        let mut r = vec![Complex::new(0.0, 0.0); points];
        exec::for_each_chunk_mut(&mut r, exec::SUM_CHUNK, |ci, chunk| {
            let base = ci * exec::SUM_CHUNK;
            for (off, v) in chunk.iter_mut().enumerate() {
                let i = base + off;
                *v = rhs_hat[i] - div_hat[i];
            }
        });
        r[0] = Complex::new(0.0, 0.0);
        Ok(r)
    }

    fn div_b_grad(&self, p_hat: &[Complex<f64>], b: &[f64]) -> Result<Vec<Complex<f64>>> {
        let grid = self.grid;
        let points = grid.points();
        let dim = grid.dim();
        let mut div_hat = vec![Complex::new(0.0, 0.0); points];
        for axis in 0..dim {
            // dP/dx_axis in physical space
            let mut dp = p_hat.to_vec();
            exec::for_each_chunk_mut(&mut dp, exec::SUM_CHUNK, |ci, chunk| {
                let base = ci * exec::SUM_CHUNK;
                for (off, v) in chunk.iter_mut().enumerate() {
                    let ids = grid.unravel(base + off);
                    *v *= Complex::new(0.0, grid.deriv_wavenumber(ids[axis]));
                }
            });
            crate::fft::ndfft(&mut dp, grid.resolution(), dim, false);
            // multiply by b, forward transform, accumulate i k (b dP)
            let mut flux: Vec<Complex<f64>> = dp
                .iter()
                .zip(b.iter())
                .map(|(v, &bb)| Complex::new(v.re * bb, 0.0))
                .collect();
            crate::fft::ndfft(&mut flux, grid.resolution(), dim, true);
            exec::for_each_chunk_mut(&mut div_hat, exec::SUM_CHUNK, |ci, chunk| {
                let base = ci * exec::SUM_CHUNK;
                for (off, v) in chunk.iter_mut().enumerate() {
                    let i = base + off;
                    let ids = grid.unravel(i);
                    *v += flux[i] * Complex::new(0.0, grid.deriv_wavenumber(ids[axis]));
                }
            });
        }
        Ok(div_hat)
    }

    fn assemble(
        &self,
        rho: &PeriodicField,
        u_star: &PeriodicField,
        p_hat: &[Complex<f64>],
        b: &[f64],
    ) -> Result<(PeriodicField, PeriodicField, f64)> {
        let grid = self.grid;
        let dim = grid.dim();
        let mut u = u_star.clone();
        for axis in 0..dim {
            let mut dp = p_hat.to_vec();
            exec::for_each_chunk_mut(&mut dp, exec::SUM_CHUNK, |ci, chunk| {
                let base = ci * exec::SUM_CHUNK;
                for (off, v) in chunk.iter_mut().enumerate() {
                    let ids = grid.unravel(base + off);
                    *v *= Complex::new(0.0, grid.deriv_wavenumber(ids[axis]));
                }
            });
            crate::fft::ndfft(&mut dp, grid.resolution(), dim, false);
            let comp = u.component_mut(axis);
            exec::for_each_chunk_mut(comp, exec::SUM_CHUNK, |ci, chunk| {
                let base = ci * exec::SUM_CHUNK;
                for (off, v) in chunk.iter_mut().enumerate() {
                    let i = base + off;
                    *v -= b[i] * dp[i].re;
                }
            });
        }
        let mut p_phys = p_hat.to_vec();
        crate::fft::ndfft(&mut p_phys, grid.resolution(), dim, false);
        let p = PeriodicField::from_data(grid, 1, p_phys.iter().map(|c| c.re).collect())?;
        let residual = u.divergence()?.lp_norm(2.0)?;
        let _ = rho;
        Ok((u, p, residual))
    }
}

/// Initial-condition families.
#[derive(Debug, Clone)]
pub enum InitKind {
    TaylorGreen {
        rho_base: f64,
        rho_amp: f64,
        vel_amp: f64,
    },
    ShearLayer {
        width: f64,
        perturb: f64,
        rho_base: f64,
        rho_amp: f64,
    },
    RayleighTaylorLike {
        rho_base: f64,
        contrast: f64,
        width: f64,
        perturb: f64,
    },
    Synthetic {
        alpha: f64,
        seed: u64,
        amplitude: f64,
    },
    FromCheckpoint(PathBuf),
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub grid: Grid,
    pub dt: f64,
    pub t_end: f64,
    pub rho_min: f64,
    pub cfl_limit: f64,
    /// Keep every k-th step (plus the initial state) in the trajectory.
    pub snapshot_every: usize,
    pub projection: ProjectionSettings,
    pub init: InitKind,
}

impl SolverConfig {
    pub fn new(grid: Grid, dt: f64, t_end: f64, init: InitKind) -> Self {
        Self {
            grid,
            dt,
            t_end,
            rho_min: 1e-3,
            cfl_limit: 0.5,
            snapshot_every: 1,
            projection: ProjectionSettings::default(),
            init,
        }
    }
}

/// Build, dealias, and project the initial data.
pub fn initial_state(config: &SolverConfig) -> Result<FlowState> {
    let grid = config.grid;
    if grid.dim() != 2 {
        return Err(Error::Config("the integrator is 2D".into()));
    }
    let (rho, u_raw) = match &config.init {
        InitKind::TaylorGreen {
            rho_base,
            rho_amp,
            vel_amp,
        } => {
            let rho = PeriodicField::from_fn(grid, |x| rho_base + rho_amp * x[0].sin() * x[1].sin());
            let amp = *vel_amp;
            let u = PeriodicField::from_fn_vec(grid, 2, move |x, c| {
                if c == 0 {
                    -amp * x[0].sin() * x[1].cos()
                } else {
                    amp * x[0].cos() * x[1].sin()
                }
            });
            (rho, u)
        }
        InitKind::ShearLayer {
            width,
            perturb,
            rho_base,
            rho_amp,
        } => {
            let (w, eps) = (*width, *perturb);
            let (rb, ra) = (*rho_base, *rho_amp);
            let profile = move |y: f64| -> f64 {
                ((y - std::f64::consts::FRAC_PI_2) / w).tanh()
                    - ((y - 3.0 * std::f64::consts::FRAC_PI_2) / w).tanh()
                    - 1.0
            };
            let rho = PeriodicField::from_fn(grid, move |x| rb + ra * profile(x[1]));
            let u = PeriodicField::from_fn_vec(grid, 2, move |x, c| {
                if c == 0 {
                    profile(x[1])
                } else {
                    eps * x[0].sin()
                }
            });
            (rho, u)
        }
        InitKind::RayleighTaylorLike {
            rho_base,
            contrast,
            width,
            perturb,
        } => {
            let (rb, a, w, eps) = (*rho_base, *contrast, *width, *perturb);
            let profile = move |y: f64| -> f64 {
                ((y - std::f64::consts::FRAC_PI_2) / w).tanh()
                    - ((y - 3.0 * std::f64::consts::FRAC_PI_2) / w).tanh()
                    - 1.0
            };
            let rho = PeriodicField::from_fn(grid, move |x| rb + a * profile(x[1]));
            let potential = PeriodicField::from_fn(grid, move |x| eps * x[0].sin() * x[1].sin());
            let u = potential.perp_gradient()?;
            (rho, u)
        }
        InitKind::Synthetic {
            alpha,
            seed,
            amplitude,
        } => {
            let rho = PeriodicField::constant(grid, 1, 1.0);
            let u = synth::rough_field(grid, *alpha, *seed, synth::SynthMode::DivFreeVector)?
                .scaled(*amplitude);
            (rho, u)
        }
        InitKind::FromCheckpoint(path) => {
            let state = FlowState::read_checkpoint(path)?;
            (state.rho, state.u)
        }
    };
    let rho = rho.dealias();
    let min_rho = rho.component(0).iter().cloned().fold(f64::INFINITY, f64::min);
    if min_rho < config.rho_min {
        return Err(Error::DensityFloor {
            t: 0.0,
            min_rho,
            floor: config.rho_min,
        });
    }
    let u_raw = u_raw.dealias();
    let mut projector = Projector::new(grid, config.projection, config.rho_min);
    let proj = projector.project(&rho, &u_raw)?;
    Ok(FlowState::new(rho, proj.u, proj.p, 0.0))
}

struct Tendency {
    drho: PeriodicField,
    du: PeriodicField,
    p: PeriodicField,
}

/// RK4 stepper with a warm-started projector and a cached tendency (the
/// final evaluation of one step seeds the next step and diagnoses the
/// state pressure).
pub struct Stepper {
    config: SolverConfig,
    projector: Projector,
    cached: Option<Tendency>,
}

impl Stepper {
    pub fn new(config: SolverConfig) -> Self {
        let projector = Projector::new(config.grid, config.projection, config.rho_min);
        Self {
            config,
            projector,
            cached: None,
        }
    }

    fn tendency(&mut self, rho: &PeriodicField, u: &PeriodicField) -> Result<Tendency> {
        let grid = self.config.grid;
        let points = grid.points();
        let grad_rho = rho.gradient()?;
        let grad_u0 = rho_scalar(u, 0).gradient()?;
        let grad_u1 = rho_scalar(u, 1).gradient()?;
        let u0 = u.component(0);
        let u1 = u.component(1);

        let mut adv_rho = PeriodicField::zeros(grid, 1);
        {
            let dst = adv_rho.component_mut(0);
            let gx = grad_rho.component(0);
            let gy = grad_rho.component(1);
            exec::for_each_chunk_mut(dst, exec::SUM_CHUNK, |ci, chunk| {
                let base = ci * exec::SUM_CHUNK;
                for (off, v) in chunk.iter_mut().enumerate() {
                    let i = base + off;
                    *v = -(u0[i] * gx[i] + u1[i] * gy[i]);
                }
            });
        }
        let mut adv_u = PeriodicField::zeros(grid, 2);
        {
            let (g0x, g0y) = (grad_u0.component(0), grad_u0.component(1));
            let dst = adv_u.component_mut(0);
            exec::for_each_chunk_mut(dst, exec::SUM_CHUNK, |ci, chunk| {
                let base = ci * exec::SUM_CHUNK;
                for (off, v) in chunk.iter_mut().enumerate() {
                    let i = base + off;
                    *v = -(u0[i] * g0x[i] + u1[i] * g0y[i]);
                }
            });
        }
        {
            let (g1x, g1y) = (grad_u1.component(0), grad_u1.component(1));
            let dst = adv_u.component_mut(1);
            exec::for_each_chunk_mut(dst, exec::SUM_CHUNK, |ci, chunk| {
                let base = ci * exec::SUM_CHUNK;
                for (off, v) in chunk.iter_mut().enumerate() {
                    let i = base + off;
                    *v = -(u0[i] * g1x[i] + u1[i] * g1y[i]);
                }
            });
        }
        let adv_rho = adv_rho.dealias();
        let adv_u = adv_u.dealias();
        let proj = self.projector.project(rho, &adv_u)?;
        let _ = points;
        Ok(Tendency {
            drho: adv_rho,
            du: proj.u,
            p: proj.p,
        })
    }

    /// One RK4 step; stage tendencies are projected, so stage velocities
    /// remain divergence-free.
    pub fn step(&mut self, state: &FlowState, dt: f64) -> Result<FlowState> {
        let grid = self.config.grid;
        let h = grid.spacing();
        let max_u = state.u.max_abs();
        let cfl = dt * max_u / h;
        if cfl > self.config.cfl_limit + 1e-12 {
            return Err(Error::CflViolation {
                t: state.t,
                value: cfl,
                limit: self.config.cfl_limit,
            });
        }
        let min_rho = state.min_rho();
        if min_rho < self.config.rho_min {
            return Err(Error::DensityFloor {
                t: state.t,
                min_rho,
                floor: self.config.rho_min,
            });
        }

        let k1 = match self.cached.take() {
            Some(t) => t,
            None => self.tendency(&state.rho, &state.u)?,
        };
        let mk = |rho0: &PeriodicField, u0: &PeriodicField, k: &Tendency, c: f64| {
            let mut rho = rho0.clone();
            rho.axpy(c, &k.drho);
            let mut u = u0.clone();
            u.axpy(c, &k.du);
            (rho, u)
        };
        let (rho2, u2) = mk(&state.rho, &state.u, &k1, dt / 2.0);
        let k2 = self.tendency(&rho2, &u2)?;
        let (rho3, u3) = mk(&state.rho, &state.u, &k2, dt / 2.0);
        let k3 = self.tendency(&rho3, &u3)?;
        let (rho4, u4) = mk(&state.rho, &state.u, &k3, dt);
        let k4 = self.tendency(&rho4, &u4)?;

        let mut rho = state.rho.clone();
        let mut u = state.u.clone();
        for (k, w) in [(&k1, 1.0), (&k2, 2.0), (&k3, 2.0), (&k4, 1.0)] {
            rho.axpy(dt / 6.0 * w, &k.drho);
            u.axpy(dt / 6.0 * w, &k.du);
        }
        let t = state.t + dt;
        // evaluate the tendency at the new state: diagnoses P and seeds the
        // next step's first stage
        let k_next = self.tendency(&rho, &u)?;
        let p = k_next.p.clone();
        self.cached = Some(k_next);
        Ok(FlowState::new(rho, u, p, t))
    }
}

fn rho_scalar(field: &PeriodicField, c: usize) -> PeriodicField {
    field.extract(c)
}

/// One row of the run log.
#[derive(Debug, Clone, Copy)]
pub struct LogRow {
    pub t: f64,
    pub energy: f64,
    pub mass: f64,
    pub max_u: f64,
    pub div_residual: f64,
}

#[derive(Debug, Clone, Default)]
pub struct RunLog {
    pub rows: Vec<LogRow>,
}

impl RunLog {
    pub fn csv(&self) -> String {
        // energy column reports E = int rho |u|^2 dx (no 1/2)
        let mut s = String::from("t,E,mass,max_u,div_residual\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
                r.t, r.energy, r.mass, r.max_u, r.div_residual
            ));
        }
        s
    }
}

fn log_row(state: &FlowState) -> LogRow {
    LogRow {
        t: state.t,
        energy: energy::energy(state),
        mass: state.rho.grid().cell_volume() * exec::sum(state.rho.component(0)),
        max_u: state.u.max_abs(),
        div_residual: state.div_residual(),
    }
}

/// Integrate from the configured initial data; returns the trajectory of
/// kept snapshots and the per-step log.
pub fn run(config: &SolverConfig) -> Result<(FlowTrajectory, RunLog)> {
    if !(config.dt > 0.0) || !(config.t_end > 0.0) {
        return Err(Error::Config("dt and t_end must be positive".into()));
    }
    if config.snapshot_every == 0 {
        return Err(Error::Config("snapshot_every must be at least 1".into()));
    }
    let steps = (config.t_end / config.dt).round() as usize;
    if steps == 0 {
        return Err(Error::Config("t_end shorter than one step".into()));
    }
    let state0 = initial_state(config)?;
    // reject violating configs before stepping
    let cfl = config.dt * state0.u.max_abs() / config.grid.spacing();
    if cfl > config.cfl_limit + 1e-12 {
        return Err(Error::CflViolation {
            t: 0.0,
            value: cfl,
            limit: config.cfl_limit,
        });
    }
    let mut stepper = Stepper::new(config.clone());
    let mut log = RunLog::default();
    let mut snapshots = Vec::new();
    let mut state = state0;
    // diagnose the initial pressure
    let k0 = stepper.tendency(&state.rho, &state.u)?;
    state.p = k0.p.clone();
    stepper.cached = Some(k0);
    log.rows.push(log_row(&state));
    snapshots.push(state.clone());
    for step_idx in 1..=steps {
        state = stepper.step(&state, config.dt)?;
        log.rows.push(log_row(&state));
        if step_idx % config.snapshot_every == 0 {
            snapshots.push(state.clone());
        }
    }
    Ok((FlowTrajectory::from_states(snapshots)?, log))
}

/// Scalar vorticity d_x u_y - d_y u_x.
pub fn vorticity(state: &FlowState) -> Result<PeriodicField> {
    let duy_dx = state.u.extract(1).derivative(0)?;
    let dux_dy = state.u.extract(0).derivative(1)?;
    Ok(duy_dx.sub(&dux_dy))
}

/// Baroclinic torque (grad^perp rho . grad P) / rho^2.
pub fn baroclinic_torque(state: &FlowState) -> Result<PeriodicField> {
    let grid = *state.grid();
    let perp_rho = state.rho.perp_gradient()?;
    let grad_p = state.p.gradient()?;
    let mut out = PeriodicField::zeros(grid, 1);
    let rho = state.rho.component(0);
    let (ax, ay) = (perp_rho.component(0), perp_rho.component(1));
    let (bx, by) = (grad_p.component(0), grad_p.component(1));
    exec::for_each_chunk_mut(out.component_mut(0), exec::SUM_CHUNK, |ci, chunk| {
        let base = ci * exec::SUM_CHUNK;
        for (off, v) in chunk.iter_mut().enumerate() {
            let i = base + off;
            *v = (ax[i] * bx[i] + ay[i] * by[i]) / (rho[i] * rho[i]);
        }
    });
    Ok(out)
}
