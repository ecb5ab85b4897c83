//! Mollification commutators and the weak-form energy terms.
//!
//! Two layers live here. The field-level commutators ((fg)^eps - f g^eps
//! and the derivative variant) are direct statements about functions and
//! are checked pointwise against quadrature oracles. The term evaluator
//! assembles the integrated quantities A_eps and B_eps that arise when the
//! momentum equation is tested with a mollified velocity: all time
//! derivatives are realized by integration by parts onto the test function
//! and onto the mollified velocity, and all spatial derivatives land on
//! u^eps spectrally, so rough data is never differentiated directly.
//!
//! Trajectories are consumed through [`SnapshotSource`] with a ring buffer
//! of per-snapshot spectral work, so epsilon sweeps never materialize a
//! full mollified trajectory.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::exec;
use crate::field::PeriodicField;
use crate::flow::SnapshotSource;
use crate::mollify::{make_kernel, mollify_space, KernelAxes, KernelShape, MollifierKernel, TimeTaps};
use crate::scaling::{self, ScalingReport};
use crate::testfn::TestFunction;

/// Holder pairing 1/r = 1/p + 1/q (p or q may be infinite).
pub fn holder_conjugate(p: f64, q: f64) -> f64 {
    let ip = if p.is_infinite() { 0.0 } else { 1.0 / p };
    let iq = if q.is_infinite() { 0.0 } else { 1.0 / q };
    if ip + iq == 0.0 {
        f64::INFINITY
    } else {
        1.0 / (ip + iq)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct HolderExponents {
    pub p: f64,
    pub q: f64,
}

impl HolderExponents {
    pub fn new(p: f64, q: f64) -> Self {
        Self { p, q }
    }

    pub fn r(&self) -> f64 {
        holder_conjugate(self.p, self.q)
    }

    /// kappa of the density-time bound: same pairing as r.
    pub fn kappa(&self) -> f64 {
        holder_conjugate(self.p, self.q)
    }
}

/// (fg)^eps - f g^eps for scalar fields on one grid.
pub fn space_commutator(
    f: &PeriodicField,
    g: &PeriodicField,
    kernel: &MollifierKernel,
) -> Result<PeriodicField> {
    f.same_grid(g)?;
    let fg = f.mul_pointwise(g);
    let lhs = mollify_space(&fg, kernel)?;
    let rhs = f.mul_pointwise(&mollify_space(g, kernel)?);
    Ok(lhs.sub(&rhs))
}

/// [d(fg)]^eps - d(f g^eps) for a spatial axis.
pub fn derivative_commutator_space(
    f: &PeriodicField,
    g: &PeriodicField,
    axis: usize,
    kernel: &MollifierKernel,
) -> Result<PeriodicField> {
    f.same_grid(g)?;
    let fg = f.mul_pointwise(g);
    let lhs = mollify_space(&fg.derivative(axis)?, kernel)?;
    let rhs = f.mul_pointwise(&mollify_space(g, kernel)?).derivative(axis)?;
    Ok(lhs.sub(&rhs))
}

/// [d_t(fg)]^eps - d_t(f g^eps) on uniformly sampled scalar series.
///
/// The mollified side uses the kernel's derivative taps; the raw product
/// side uses centered differences at the snapshot spacing. Returns the
/// interior (time, field) pairs where both stencils fit.
pub fn derivative_commutator_time(
    f_series: &[PeriodicField],
    g_series: &[PeriodicField],
    times: &[f64],
    kernel: &MollifierKernel,
) -> Result<Vec<(f64, PeriodicField)>> {
    if f_series.len() != g_series.len() || f_series.len() != times.len() || times.len() < 3 {
        return Err(Error::TrajectoryTooShort(
            "time commutator needs matched series of at least 3 snapshots".into(),
        ));
    }
    let dt = times[1] - times[0];
    let taps = kernel.time_taps(dt)?;
    let r = taps.radius;
    if times.len() < 2 * r + 3 {
        return Err(Error::TrajectoryTooShort(format!(
            "need more than {} snapshots for eps = {}",
            2 * r + 2,
            kernel.epsilon
        )));
    }
    let grid = *f_series[0].grid();
    // spatially mollified g and products, per snapshot
    let fg: Vec<PeriodicField> = (0..times.len())
        .map(|i| f_series[i].mul_pointwise(&g_series[i]))
        .collect();
    let fg_mx: Vec<PeriodicField> = fg
        .iter()
        .map(|w| {
            if kernel.has_space() {
                mollify_space(w, kernel)
            } else {
                Ok(w.clone())
            }
        })
        .collect::<Result<_>>()?;
    let g_mx: Vec<PeriodicField> = g_series
        .iter()
        .map(|w| {
            if kernel.has_space() {
                mollify_space(w, kernel)
            } else {
                Ok(w.clone())
            }
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for i in (r + 1)..(times.len() - r - 1) {
        // [d_t(fg)]^eps via derivative taps
        let mut lhs = PeriodicField::zeros(grid, 1);
        for (k, &dw) in taps.dweights.iter().enumerate() {
            lhs.axpy(dw, &fg_mx[i + k - r]);
        }
        // f g^eps, g^eps = time window of spatially mollified g
        let g_eps_at = |j: usize| -> PeriodicField {
            let mut acc = PeriodicField::zeros(grid, 1);
            for (k, &w) in taps.weights.iter().enumerate() {
                acc.axpy(w, &g_mx[j + k - r]);
            }
            acc
        };
        let plus = f_series[i + 1].mul_pointwise(&g_eps_at(i + 1));
        let minus = f_series[i - 1].mul_pointwise(&g_eps_at(i - 1));
        let rhs = plus.sub(&minus).scaled(1.0 / (2.0 * dt));
        out.push((times[i], lhs.sub(&rhs)));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Thm1,
    Thm2,
}

impl Variant {
    pub fn label(&self) -> &'static str {
        match self {
            Variant::Thm1 => "thm1",
            Variant::Thm2 => "thm2",
        }
    }
}

/// Integrated weak-form terms at one epsilon.
#[derive(Debug, Clone)]
pub struct CommutatorTerms {
    pub variant: Variant,
    pub epsilon: f64,
    /// Signed A = A1 + A2 (time derivatives integrated by parts).
    pub a_total: f64,
    /// Signed split pieces; populated for the thm2 variant.
    pub a1: Option<f64>,
    pub a2: Option<f64>,
    /// Signed B via the spatially integrated-by-parts form.
    pub b_total: f64,
    /// Nonnegative majorants with the absolute value inside the integral.
    pub b1: f64,
    pub b2: f64,
    /// Signed split pieces; they reassemble to b_total.
    pub b1_signed: f64,
    pub b2_signed: f64,
    pub r: f64,
    pub kappa: f64,
    /// Factor diagnostics: psi-weighted space-time L2 norms.
    pub grad_u_eps_norm: f64,
    pub b1_inner_norm: f64,
    pub b2_inner_norm: f64,
    /// int int psi_t (1/2) rho |u^eps|^2 dx dt; the weak-form energy
    /// residual is a_total + b_total - this.
    pub psi_t_kinetic: f64,
    /// Same integrand against |psi_t|: the magnitude scale of the kinetic
    /// flux, which the signed terms cancel against for true solutions.
    pub abs_kinetic: f64,
}

impl CommutatorTerms {
    /// Triangle consistency |B_total| <= B1 + B2 (+ slack).
    pub fn triangle_ok(&self) -> bool {
        self.b_total.abs() <= self.b1 + self.b2 + 1e-10
    }
}

const NACC: usize = 12;

fn accumulate<F>(n: usize, f: F) -> [f64; NACC]
where
    F: Fn(usize) -> [f64; NACC] + Sync + Send,
{
    let blocks = n.div_ceil(exec::SUM_CHUNK);
    let partials = exec::map_indexed(blocks, |b| {
        let lo = b * exec::SUM_CHUNK;
        let hi = (lo + exec::SUM_CHUNK).min(n);
        let mut acc = [0.0; NACC];
        for i in lo..hi {
            let v = f(i);
            for (a, x) in acc.iter_mut().zip(v.iter()) {
                *a += x;
            }
        }
        acc
    });
    let mut total = [0.0; NACC];
    for p in partials {
        for (t, x) in total.iter_mut().zip(p.iter()) {
            *t += x;
        }
    }
    total
}

/// Per-snapshot spectral workload: raw samples plus spatially mollified
/// fields and gradients, ready for time-window sums.
struct SnapPack {
    raw_rho: Vec<f64>,
    raw_u: [Vec<f64>; 2],
    mx_u: [Vec<f64>; 2],
    /// grad[a][b] = d_b (mx_u_a)
    grad_mx_u: [[Vec<f64>; 2]; 2],
    mx_rhou: [Vec<f64>; 2],
    /// symmetric components xx, xy, yy
    mx_uu: [Vec<f64>; 3],
    mx_rhouu: [Vec<f64>; 3],
    mx_rho: Option<Vec<f64>>,
}

fn build_pack(
    src: &dyn SnapshotSource,
    j: usize,
    kernel: &MollifierKernel,
    want_rho_eps: bool,
) -> Result<SnapPack> {
    let rho = src.density(j);
    let u = src.velocity(j);
    let grid = *rho.grid();
    let points = grid.points();

    let mul = |a: &[f64], b: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; points];
        exec::for_each_chunk_mut(&mut out, exec::SUM_CHUNK, |ci, chunk| {
            let base = ci * exec::SUM_CHUNK;
            for (off, v) in chunk.iter_mut().enumerate() {
                *v = a[base + off] * b[base + off];
            }
        });
        out
    };

    let u0 = u.component(0).to_vec();
    let u1 = u.component(1).to_vec();
    let rho0 = rho.component(0).to_vec();
    let rhou0 = mul(&rho0, &u0);
    let rhou1 = mul(&rho0, &u1);
    let uu = [mul(&u0, &u0), mul(&u0, &u1), mul(&u1, &u1)];
    let rhouu = [mul(&rho0, &uu[0]), mul(&rho0, &uu[1]), mul(&rho0, &uu[2])];

    let smooth_scalar = |data: &[f64]| -> Result<Vec<f64>> {
        let f = PeriodicField::from_data(grid, 1, data.to_vec())?;
        Ok(mollify_space(&f, kernel)?.component(0).to_vec())
    };

    // mollified velocity and its gradient from one spectral pass
    let mut u_spec = u.to_spectral();
    kernel.apply_space(&mut u_spec);
    let mx_u_field = u_spec.to_physical();
    let mut grad_mx_u: [[Vec<f64>; 2]; 2] = Default::default();
    for a in 0..2 {
        for b in 0..2 {
            let comp = PeriodicField::from_data(grid, 1, mx_u_field.component(a).to_vec())?;
            grad_mx_u[a][b] = comp.derivative(b)?.component(0).to_vec();
        }
    }

    let mx_rho = if want_rho_eps {
        Some(smooth_scalar(&rho0)?)
    } else {
        None
    };
    Ok(SnapPack {
        raw_rho: rho0,
        raw_u: [u0, u1],
        mx_u: [
            mx_u_field.component(0).to_vec(),
            mx_u_field.component(1).to_vec(),
        ],
        grad_mx_u,
        mx_rhou: [smooth_scalar(&rhou0)?, smooth_scalar(&rhou1)?],
        mx_uu: [
            smooth_scalar(&uu[0])?,
            smooth_scalar(&uu[1])?,
            smooth_scalar(&uu[2])?,
        ],
        mx_rhouu: [
            smooth_scalar(&rhouu[0])?,
            smooth_scalar(&rhouu[1])?,
            smooth_scalar(&rhouu[2])?,
        ],
        mx_rho,
    })
}

/// Time-window sums of one pack slice.
struct WindowedFields {
    u_eps: [Vec<f64>; 2],
    dudt_eps: [Vec<f64>; 2],
    rhou_eps: [Vec<f64>; 2],
    uu_eps: [Vec<f64>; 3],
    rhouu_eps: [Vec<f64>; 3],
    grad_u_eps: [[Vec<f64>; 2]; 2],
    rho_eps: Option<Vec<f64>>,
}

fn window_sums(
    ring: &VecDeque<(usize, SnapPack)>,
    center: usize,
    taps: &TimeTaps,
    points: usize,
    want_rho_eps: bool,
) -> WindowedFields {
    let r = taps.radius;
    let zero = || vec![0.0; points];
    let mut w = WindowedFields {
        u_eps: [zero(), zero()],
        dudt_eps: [zero(), zero()],
        rhou_eps: [zero(), zero()],
        uu_eps: [zero(), zero(), zero()],
        rhouu_eps: [zero(), zero(), zero()],
        grad_u_eps: [[zero(), zero()], [zero(), zero()]],
        rho_eps: if want_rho_eps { Some(zero()) } else { None },
    };
    let base_index = ring.front().expect("ring nonempty").0;
    for (k, (&wk, &dk)) in taps.weights.iter().zip(taps.dweights.iter()).enumerate() {
        let j = center + k - r;
        let pack = &ring[j - base_index].1;
        debug_assert_eq!(ring[j - base_index].0, j);
        let axpy = |dst: &mut [f64], src: &[f64], c: f64| {
            exec::for_each_chunk_mut(dst, exec::SUM_CHUNK, |ci, chunk| {
                let base = ci * exec::SUM_CHUNK;
                for (off, v) in chunk.iter_mut().enumerate() {
                    *v += c * src[base + off];
                }
            });
        };
        for a in 0..2 {
            axpy(&mut w.u_eps[a], &pack.mx_u[a], wk);
            axpy(&mut w.dudt_eps[a], &pack.mx_u[a], dk);
            axpy(&mut w.rhou_eps[a], &pack.mx_rhou[a], wk);
            for b in 0..2 {
                axpy(&mut w.grad_u_eps[a][b], &pack.grad_mx_u[a][b], wk);
            }
        }
        for c in 0..3 {
            axpy(&mut w.uu_eps[c], &pack.mx_uu[c], wk);
            axpy(&mut w.rhouu_eps[c], &pack.mx_rhouu[c], wk);
        }
        if let (Some(dst), Some(src)) = (w.rho_eps.as_mut(), pack.mx_rho.as_ref()) {
            axpy(dst, src, wk);
        }
    }
    w
}

/// One time level viewed as slices with per-group scale factors. The
/// general path uses unit scales over windowed sums; the separable path
/// points at static base fields with time-dependent scalars.
struct LevelView<'a> {
    rho_i: &'a [f64],
    u_i: [&'a [f64]; 2],
    u_i_scale: f64,
    ue: [&'a [f64]; 2],
    ue_scale: f64,
    due: [&'a [f64]; 2],
    due_scale: f64,
    rue: [&'a [f64]; 2],
    rue_scale: f64,
    uu_e: [&'a [f64]; 3],
    uu_scale: f64,
    ruu_e: [&'a [f64]; 3],
    ruu_scale: f64,
    grad: [&'a [f64]; 4],
    grad_scale: f64,
    rho_eps: Option<(&'a [f64], f64)>,
}

fn level_integrals(view: &LevelView<'_>, points: usize) -> [f64; NACC] {
    accumulate(points, |x| {
        let rho_i = view.rho_i[x];
        let u_i = [view.u_i_scale * view.u_i[0][x], view.u_i_scale * view.u_i[1][x]];
        let ue = [view.ue_scale * view.ue[0][x], view.ue_scale * view.ue[1][x]];
        let due = [view.due_scale * view.due[0][x], view.due_scale * view.due[1][x]];
        let rue = [view.rue_scale * view.rue[0][x], view.rue_scale * view.rue[1][x]];
        let g = [
            view.grad_scale * view.grad[0][x],
            view.grad_scale * view.grad[1][x],
            view.grad_scale * view.grad[2][x],
            view.grad_scale * view.grad[3][x],
        ];
        let uu_e = [
            view.uu_scale * view.uu_e[0][x],
            view.uu_scale * view.uu_e[1][x],
            view.uu_scale * view.uu_e[2][x],
        ];
        let ruu_e = [
            view.ruu_scale * view.ruu_e[0][x],
            view.ruu_scale * view.ruu_e[1][x],
            view.ruu_scale * view.ruu_e[2][x],
        ];

        // commutator inside A: G = (rho u)^eps - rho u^eps (thm1) or
        // (rho u)^eps - rho^eps u^eps (thm2)
        let rho_for_g = match view.rho_eps {
            Some((re, s)) => s * re[x],
            None => rho_i,
        };
        let gv = [rue[0] - rho_for_g * ue[0], rue[1] - rho_for_g * ue[1]];
        let a1_inner = ue[0] * gv[0] + ue[1] * gv[1];
        let a2_inner = due[0] * gv[0] + due[1] * gv[1];

        // B tensors, index convention T_ab : g_ab with g_ab = d_b u^eps_a
        let (m, nn) = match view.rho_eps {
            None => {
                // thm1: M = (rho u x u)^eps - rho (u x u)^eps (symmetric)
                //        N = rho [(u x u)^eps - u x u^eps]
                let m = [
                    ruu_e[0] - rho_i * uu_e[0],
                    ruu_e[1] - rho_i * uu_e[1],
                    ruu_e[1] - rho_i * uu_e[1],
                    ruu_e[2] - rho_i * uu_e[2],
                ];
                let nn = [
                    rho_i * (uu_e[0] - u_i[0] * ue[0]),
                    rho_i * (uu_e[1] - u_i[0] * ue[1]),
                    rho_i * (uu_e[1] - u_i[1] * ue[0]),
                    rho_i * (uu_e[2] - u_i[1] * ue[1]),
                ];
                (m, nn)
            }
            Some(_) => {
                // thm2: M = (rho u x u)^eps - (rho u)^eps x u
                //        N = (rho u)^eps x (u - u^eps)
                let m = [
                    ruu_e[0] - rue[0] * u_i[0],
                    ruu_e[1] - rue[0] * u_i[1],
                    ruu_e[1] - rue[1] * u_i[0],
                    ruu_e[2] - rue[1] * u_i[1],
                ];
                let nn = [
                    rue[0] * (u_i[0] - ue[0]),
                    rue[0] * (u_i[1] - ue[1]),
                    rue[1] * (u_i[0] - ue[0]),
                    rue[1] * (u_i[1] - ue[1]),
                ];
                (m, nn)
            }
        };
        let contract =
            |t: &[f64; 4]| t[0] * g[0] + t[1] * g[1] + t[2] * g[2] + t[3] * g[3];
        let frob =
            |t: &[f64; 4]| (t[0] * t[0] + t[1] * t[1] + t[2] * t[2] + t[3] * t[3]).sqrt();
        let gfrob = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3]).sqrt();
        let kinetic = 0.5 * rho_i * (ue[0] * ue[0] + ue[1] * ue[1]);

        [
            a1_inner,
            a2_inner,
            contract(&m),
            contract(&nn),
            frob(&m) * gfrob,
            frob(&nn) * gfrob,
            gfrob * gfrob,
            frob(&m) * frob(&m),
            frob(&nn) * frob(&nn),
            kinetic,
            0.0,
            0.0,
        ]
    })
}

/// Evaluate the weak-form terms for one epsilon.
///
/// The test function support inflated by epsilon must sit inside the
/// trajectory time range, and the snapshot spacing must satisfy
/// dt <= eps/4.
pub fn evaluate_terms(
    src: &dyn SnapshotSource,
    psi: &TestFunction,
    shape: KernelShape,
    epsilon: f64,
    variant: Variant,
    exps: HolderExponents,
) -> Result<CommutatorTerms> {
    let grid = src.grid();
    if grid.dim() != 2 {
        return Err(Error::Config("weak-form terms are evaluated on 2D grids".into()));
    }
    let kernel = make_kernel(shape, epsilon, KernelAxes::SpaceTime, &grid)?;
    let dt = src.time_step();
    let taps = kernel.time_taps(dt)?;
    let r = taps.radius;
    let (lo, hi) = psi.support();
    if !hi.is_finite() {
        return Err(Error::Config(
            "term evaluation needs a compactly supported test function".into(),
        ));
    }
    let t0 = src.start_time();
    let t1 = src.end_time();
    let tol = 1e-9 * dt.max(1.0);
    if lo - epsilon < t0 - tol || hi + epsilon > t1 + tol {
        return Err(Error::SupportOutOfRange {
            lo,
            hi,
            epsilon,
            t0,
            t1,
        });
    }
    let i_lo = ((lo - t0) / dt).ceil() as usize;
    let i_hi = (((hi - t0) / dt).floor() as usize).min(src.len() - 1);
    let points = grid.points();
    let cell = grid.cell_volume();
    let want_rho_eps = variant == Variant::Thm2;

    let mut acc_time = [0.0f64; NACC];
    let dv = cell * dt;
    let mut add_level = |psi_v: f64, psi_d: f64, sums: [f64; NACC]| {
        acc_time[0] += -psi_d * sums[0] * dv; // A1 (signed)
        acc_time[1] += -psi_v * sums[1] * dv; // A2 (signed)
        acc_time[2] += -psi_v * sums[2] * dv; // B1 signed
        acc_time[3] += -psi_v * sums[3] * dv; // B2 signed
        acc_time[4] += psi_v.abs() * sums[4] * dv; // B1 majorant
        acc_time[5] += psi_v.abs() * sums[5] * dv; // B2 majorant
        acc_time[6] += psi_v.abs() * sums[6] * dv; // |grad u^eps|^2
        acc_time[7] += psi_v.abs() * sums[7] * dv; // |B1 inner|^2
        acc_time[8] += psi_v.abs() * sums[8] * dv; // |B2 inner|^2
        acc_time[9] += psi_d * sums[9] * dv; // psi_t kinetic term
        acc_time[10] += psi_d.abs() * sums[9] * dv; // its magnitude scale
    };

    if let Some(parts) = src.separable() {
        // Every snapshot field is a scalar multiple of a static base field:
        // one set of mollified base fields serves all time levels, and the
        // time convolutions collapse to scalar windowed sums. The evaluated
        // quantities agree with the general path to float associativity.
        let amps = &parts.amplitudes;
        debug_assert_eq!(amps.len(), src.len());
        let rho = parts.rho.component(0).to_vec();
        let u0 = parts.u_base.component(0).to_vec();
        let u1 = parts.u_base.component(1).to_vec();
        let mul = |a: &[f64], b: &[f64]| -> Vec<f64> {
            a.iter().zip(b.iter()).map(|(x, y)| x * y).collect()
        };
        let uu = [mul(&u0, &u0), mul(&u0, &u1), mul(&u1, &u1)];
        let rhou = [mul(&rho, &u0), mul(&rho, &u1)];
        let ruu = [mul(&rho, &uu[0]), mul(&rho, &uu[1]), mul(&rho, &uu[2])];
        let smooth = |data: &[f64]| -> Result<Vec<f64>> {
            let f = PeriodicField::from_data(grid, 1, data.to_vec())?;
            Ok(mollify_space(&f, &kernel)?.component(0).to_vec())
        };
        let mut u_spec = parts.u_base.to_spectral();
        kernel.apply_space(&mut u_spec);
        let mx_u_field = u_spec.to_physical();
        let mx_u = [
            mx_u_field.component(0).to_vec(),
            mx_u_field.component(1).to_vec(),
        ];
        let mut grad = Vec::with_capacity(4);
        for a in 0..2 {
            let comp = PeriodicField::from_data(grid, 1, mx_u_field.component(a).to_vec())?;
            for b in 0..2 {
                grad.push(comp.derivative(b)?.component(0).to_vec());
            }
        }
        let mx_rhou = [smooth(&rhou[0])?, smooth(&rhou[1])?];
        let mx_uu = [smooth(&uu[0])?, smooth(&uu[1])?, smooth(&uu[2])?];
        let mx_ruu = [smooth(&ruu[0])?, smooth(&ruu[1])?, smooth(&ruu[2])?];
        let mx_rho = if want_rho_eps { Some(smooth(&rho)?) } else { None };

        for i in i_lo..=i_hi {
            let t = src.time(i);
            let psi_v = psi.value(t);
            let psi_d = psi.derivative(t);
            if psi_v == 0.0 && psi_d == 0.0 {
                continue;
            }
            let (mut a_t, mut a_dot, mut a2_t) = (0.0, 0.0, 0.0);
            for (k, (&wk, &dk)) in taps.weights.iter().zip(taps.dweights.iter()).enumerate() {
                let aj = amps[i + k - r];
                a_t += wk * aj;
                a_dot += dk * aj;
                a2_t += wk * aj * aj;
            }
            let view = LevelView {
                rho_i: &rho,
                u_i: [&u0, &u1],
                u_i_scale: amps[i],
                ue: [&mx_u[0], &mx_u[1]],
                ue_scale: a_t,
                due: [&mx_u[0], &mx_u[1]],
                due_scale: a_dot,
                rue: [&mx_rhou[0], &mx_rhou[1]],
                rue_scale: a_t,
                uu_e: [&mx_uu[0], &mx_uu[1], &mx_uu[2]],
                uu_scale: a2_t,
                ruu_e: [&mx_ruu[0], &mx_ruu[1], &mx_ruu[2]],
                ruu_scale: a2_t,
                grad: [&grad[0], &grad[1], &grad[2], &grad[3]],
                grad_scale: a_t,
                rho_eps: mx_rho.as_deref().map(|s| (s, 1.0)),
            };
            add_level(psi_v, psi_d, level_integrals(&view, points));
        }
    } else {
        let mut ring: VecDeque<(usize, SnapPack)> = VecDeque::new();
        for i in i_lo..=i_hi {
            // slide the ring to cover [i-r, i+r]
            while let Some(front) = ring.front() {
                if front.0 + r < i {
                    ring.pop_front();
                } else {
                    break;
                }
            }
            let next_needed = ring.back().map(|b| b.0 + 1).unwrap_or(i - r);
            for j in next_needed..=i + r {
                ring.push_back((j, build_pack(src, j, &kernel, want_rho_eps)?));
            }

            let t = src.time(i);
            let psi_v = psi.value(t);
            let psi_d = psi.derivative(t);
            if psi_v == 0.0 && psi_d == 0.0 {
                continue;
            }
            let w = window_sums(&ring, i, &taps, points, want_rho_eps);
            let base_index = ring.front().expect("ring nonempty").0;
            let center = &ring[i - base_index].1;
            debug_assert_eq!(ring[i - base_index].0, i);
            let view = LevelView {
                rho_i: &center.raw_rho,
                u_i: [&center.raw_u[0], &center.raw_u[1]],
                u_i_scale: 1.0,
                ue: [&w.u_eps[0], &w.u_eps[1]],
                ue_scale: 1.0,
                due: [&w.dudt_eps[0], &w.dudt_eps[1]],
                due_scale: 1.0,
                rue: [&w.rhou_eps[0], &w.rhou_eps[1]],
                rue_scale: 1.0,
                uu_e: [&w.uu_eps[0], &w.uu_eps[1], &w.uu_eps[2]],
                uu_scale: 1.0,
                ruu_e: [&w.rhouu_eps[0], &w.rhouu_eps[1], &w.rhouu_eps[2]],
                ruu_scale: 1.0,
                grad: [
                    &w.grad_u_eps[0][0],
                    &w.grad_u_eps[0][1],
                    &w.grad_u_eps[1][0],
                    &w.grad_u_eps[1][1],
                ],
                grad_scale: 1.0,
                rho_eps: w.rho_eps.as_deref().map(|s| (s, 1.0)),
            };
            add_level(psi_v, psi_d, level_integrals(&view, points));
        }
    }

    let (a1, a2) = (acc_time[0], acc_time[1]);
    Ok(CommutatorTerms {
        variant,
        epsilon,
        a_total: a1 + a2,
        a1: (variant == Variant::Thm2).then_some(a1),
        a2: (variant == Variant::Thm2).then_some(a2),
        b_total: acc_time[2] + acc_time[3],
        b1: acc_time[4],
        b2: acc_time[5],
        b1_signed: acc_time[2],
        b2_signed: acc_time[3],
        r: exps.r(),
        kappa: exps.kappa(),
        grad_u_eps_norm: acc_time[6].sqrt(),
        b1_inner_norm: acc_time[7].sqrt(),
        b2_inner_norm: acc_time[8].sqrt(),
        psi_t_kinetic: acc_time[9],
        abs_kinetic: acc_time[10],
    })
}

/// Unsplit B_eps in the pre-integration-by-parts form of the weak
/// formulation: int int psi [ (div(rho u x u))^eps - div(rho u x u^eps) ] . u^eps.
/// Used to cross-check the integrated-by-parts route.
pub fn term_b_unsplit(
    src: &dyn SnapshotSource,
    psi: &TestFunction,
    shape: KernelShape,
    epsilon: f64,
) -> Result<f64> {
    let grid = src.grid();
    let kernel = make_kernel(shape, epsilon, KernelAxes::SpaceTime, &grid)?;
    let dt = src.time_step();
    let taps = kernel.time_taps(dt)?;
    let r = taps.radius;
    let (lo, hi) = psi.support();
    let t0 = src.start_time();
    let i_lo = ((lo - t0) / dt).ceil() as usize;
    let i_hi = (((hi - t0) / dt).floor() as usize).min(src.len() - 1);
    let points = grid.points();
    let mut total = 0.0;
    for i in i_lo..=i_hi {
        let psi_v = psi.value(src.time(i));
        if psi_v == 0.0 {
            continue;
        }
        // time-mollified fields at level i, assembled directly
        let mut div_ruu_eps = PeriodicField::zeros(grid, 2);
        let mut u_eps = PeriodicField::zeros(grid, 2);
        for (k, &wk) in taps.weights.iter().enumerate() {
            let j = i + k - r;
            let rho = src.density(j);
            let u = src.velocity(j);
            let mut ruu = PeriodicField::zeros(grid, 2);
            // (div(rho u x u))_a = d_b (rho u_a u_b)
            for a in 0..2 {
                let mut acc = PeriodicField::zeros(grid, 1);
                for b in 0..2 {
                    let t_ab = rho
                        .mul_pointwise(&u.extract(a))
                        .mul_pointwise(&u.extract(b));
                    acc.axpy(1.0, &t_ab.derivative(b)?);
                }
                ruu.component_mut(a).copy_from_slice(acc.component(0));
            }
            let ruu_mx = mollify_space(&ruu, &kernel)?;
            div_ruu_eps.axpy(wk, &ruu_mx);
            let mut u_mx = u.clone();
            u_mx = mollify_space(&u_mx, &kernel)?;
            u_eps.axpy(wk, &u_mx);
        }
        // div(rho u x u^eps) at level i uses raw rho, u and the already
        // windowed u^eps
        let rho_i = src.density(i);
        let u_i = src.velocity(i);
        let mut div_mixed = PeriodicField::zeros(grid, 2);
        for a in 0..2 {
            let mut acc = PeriodicField::zeros(grid, 1);
            for b in 0..2 {
                let t_ab = rho_i
                    .mul_pointwise(&u_i.extract(a))
                    .mul_pointwise(&u_eps.extract(b));
                acc.axpy(1.0, &t_ab.derivative(b)?);
            }
            div_mixed.component_mut(a).copy_from_slice(acc.component(0));
        }
        let diff = div_ruu_eps.sub(&div_mixed);
        let inner = exec::sum_with(points, |x| {
            diff.component(0)[x] * u_eps.component(0)[x]
                + diff.component(1)[x] * u_eps.component(1)[x]
        });
        total += psi_v * inner * grid.cell_volume() * dt;
    }
    Ok(total)
}

/// Predicted decay slopes per variant, from the claimed rates.
#[derive(Debug, Clone, Copy)]
pub struct PredictedSlopes {
    /// A_total: thm1 has no claimed rate (0 marks "no guaranteed decay");
    /// thm2 carries the A2 rate.
    pub a: f64,
    pub a2: Option<f64>,
    pub b1: f64,
    pub b2: f64,
}

pub fn predicted_slopes(variant: Variant, alpha: f64, beta: f64) -> PredictedSlopes {
    match variant {
        Variant::Thm1 => PredictedSlopes {
            a: 0.0,
            a2: None,
            b1: 3.0 * alpha,
            b2: 3.0 * alpha - 1.0,
        },
        Variant::Thm2 => PredictedSlopes {
            a: alpha,
            a2: Some(alpha + 2.0 * beta - 1.0),
            b1: 2.0 * alpha + beta - 1.0,
            b2: 2.0 * alpha + beta - 1.0,
        },
    }
}

/// Full epsilon sweep of the weak-form terms. The snapshot source is rebuilt
/// per epsilon (synthetic sources sample at dt = eps/4).
pub struct TermSweepReport {
    pub variant: Variant,
    pub terms: Vec<CommutatorTerms>,
    pub a_report: ScalingReport,
    pub a2_report: Option<ScalingReport>,
    pub b1_report: ScalingReport,
    pub b2_report: ScalingReport,
    /// Informational factor slopes (psi-weighted L2 norms vs eps).
    pub grad_factor_slope: Option<f64>,
    pub b1_inner_slope: Option<f64>,
    pub b2_inner_slope: Option<f64>,
}

impl TermSweepReport {
    pub fn reports(&self) -> Vec<&ScalingReport> {
        let mut out = vec![&self.a_report, &self.b1_report, &self.b2_report];
        if let Some(a2) = &self.a2_report {
            out.push(a2);
        }
        out
    }

    pub fn any_failed(&self) -> bool {
        self.reports().iter().any(|r| r.verdict.failed())
    }

    /// CSV rows `variant,term,epsilon,value`.
    pub fn csv(&self) -> String {
        let mut s = String::from("variant,term,epsilon,value\n");
        let v = self.variant.label();
        for t in &self.terms {
            s.push_str(&format!("{v},A,{:.12e},{:.12e}\n", t.epsilon, t.a_total));
            if let (Some(a1), Some(a2)) = (t.a1, t.a2) {
                s.push_str(&format!("{v},A1,{:.12e},{:.12e}\n", t.epsilon, a1));
                s.push_str(&format!("{v},A2,{:.12e},{:.12e}\n", t.epsilon, a2));
            }
            s.push_str(&format!("{v},B,{:.12e},{:.12e}\n", t.epsilon, t.b_total));
            s.push_str(&format!("{v},B1,{:.12e},{:.12e}\n", t.epsilon, t.b1));
            s.push_str(&format!("{v},B2,{:.12e},{:.12e}\n", t.epsilon, t.b2));
            s.push_str(&format!(
                "{v},grad_u_eps,{:.12e},{:.12e}\n",
                t.epsilon, t.grad_u_eps_norm
            ));
            s.push_str(&format!(
                "{v},B1_inner,{:.12e},{:.12e}\n",
                t.epsilon, t.b1_inner_norm
            ));
            s.push_str(&format!(
                "{v},B2_inner,{:.12e},{:.12e}\n",
                t.epsilon, t.b2_inner_norm
            ));
        }
        s
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for r in self.reports() {
            s.push_str(&r.summary());
            s.push('\n');
        }
        if let (Some(g), Some(b1), Some(b2)) =
            (self.grad_factor_slope, self.b1_inner_slope, self.b2_inner_slope)
        {
            s.push_str(&format!(
                "factor slopes: |grad u^eps| {:.3}, |B1 inner| {:.3}, |B2 inner| {:.3}\n",
                g, b1, b2
            ));
        }
        s
    }
}

pub fn term_sweep<S, F>(
    make_source: F,
    psi: &TestFunction,
    shape: KernelShape,
    eps_list: &[f64],
    variant: Variant,
    exps: HolderExponents,
    predicted: PredictedSlopes,
    tolerance: f64,
) -> Result<TermSweepReport>
where
    S: SnapshotSource,
    F: Fn(f64) -> Result<S>,
{
    scaling::check_sweep_geometry(eps_list, 4)?;
    let mut terms = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let src = make_source(eps)?;
        terms.push(evaluate_terms(&src, psi, shape, eps, variant, exps)?);
    }
    let pts =
        |f: &dyn Fn(&CommutatorTerms) -> f64| -> Vec<(f64, f64)> {
            terms.iter().map(|t| (t.epsilon, f(t).abs())).collect()
        };
    let variant_tag = variant.label();
    let a_report = scaling::build_report(
        format!("{variant_tag}-A"),
        pts(&|t| t.a_total),
        predicted.a,
        tolerance,
    );
    let a2_report = predicted.a2.map(|slope| {
        scaling::build_report(
            format!("{variant_tag}-A2"),
            pts(&|t| t.a2.unwrap_or(0.0)),
            slope,
            tolerance,
        )
    });
    let b1_report = scaling::build_report(
        format!("{variant_tag}-B1"),
        pts(&|t| t.b1),
        predicted.b1,
        tolerance,
    );
    let b2_report = scaling::build_report(
        format!("{variant_tag}-B2"),
        pts(&|t| t.b2),
        predicted.b2,
        tolerance,
    );
    let slope_of = |f: &dyn Fn(&CommutatorTerms) -> f64| -> Option<f64> {
        scaling::fit_loglog(&pts(f)).map(|fit| fit.slope)
    };
    let grad_factor_slope = slope_of(&|t| t.grad_u_eps_norm);
    let b1_inner_slope = slope_of(&|t| t.b1_inner_norm);
    let b2_inner_slope = slope_of(&|t| t.b2_inner_norm);
    Ok(TermSweepReport {
        variant,
        terms,
        a_report,
        a2_report,
        b1_report,
        b2_report,
        grad_factor_slope,
        b1_inner_slope,
        b2_inner_slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::synth;

    fn kernel_for(grid: &Grid, eps: f64) -> MollifierKernel {
        make_kernel(KernelShape::CompactBump, eps, KernelAxes::Space, grid).unwrap()
    }

    #[test]
    fn constant_f_commutes_exactly() {
        let grid = Grid::square(32).unwrap();
        let f = PeriodicField::constant(grid, 1, 4.0);
        let g = PeriodicField::from_fn(grid, |x| x[0].sin() + (2.0 * x[1]).cos());
        let kernel = kernel_for(&grid, 0.6);
        let c = space_commutator(&f, &g, &kernel).unwrap();
        assert!(c.max_abs() <= 1e-12, "commutator {}", c.max_abs());
        let zero = PeriodicField::zeros(grid, 1);
        let c0 = space_commutator(&g, &zero, &kernel).unwrap();
        assert!(c0.max_abs() <= 1e-13);
    }

    #[test]
    fn matches_direct_integral_identity_pointwise() {
        // int g(x-z) (f(x-z) - f(x)) eta_eps(z) dz at every grid point
        let grid = Grid::square(32).unwrap();
        let f = synth::rough_field(grid, 0.5, 3, synth::SynthMode::Scalar).unwrap();
        let g = PeriodicField::from_fn(grid, |x| x[0].sin() * x[1].cos() + 0.3);
        let eps = 0.8;
        let kernel = kernel_for(&grid, eps);
        let comm = space_commutator(&f, &g, &kernel).unwrap();
        let eta = kernel.samples().unwrap();
        let n = grid.resolution();
        let vol = grid.cell_volume();
        let fd = f.component(0);
        let gd = g.component(0);
        let ed = eta.component(0);
        let mut max_err = 0.0f64;
        for ix in 0..n {
            for iy in 0..n {
                let x = ix * n + iy;
                let mut acc = 0.0;
                for zx in 0..n {
                    for zy in 0..n {
                        let w = ed[zx * n + zy];
                        if w == 0.0 {
                            continue;
                        }
                        let sx = (ix + n - zx) % n;
                        let sy = (iy + n - zy) % n;
                        let s = sx * n + sy;
                        acc += gd[s] * (fd[s] - fd[x]) * w * vol;
                    }
                }
                max_err = max_err.max((acc - comm.component(0)[x]).abs());
            }
        }
        assert!(max_err <= 1e-10, "pointwise error {max_err}");
    }

    #[test]
    fn bilinearity() {
        let grid = Grid::square(32).unwrap();
        let f1 = synth::rough_field(grid, 0.4, 1, synth::SynthMode::Scalar).unwrap();
        let f2 = synth::rough_field(grid, 0.6, 2, synth::SynthMode::Scalar).unwrap();
        let g = PeriodicField::from_fn(grid, |x| (x[0] + x[1]).cos());
        let kernel = kernel_for(&grid, 0.5);
        let lhs = space_commutator(&f1.scaled(2.5), &g, &kernel).unwrap();
        let rhs = space_commutator(&f1, &g, &kernel).unwrap().scaled(2.5);
        assert!(lhs.sub(&rhs).max_abs() <= 1e-10);
        let sum_lhs = space_commutator(&f1.add(&f2), &g, &kernel).unwrap();
        let sum_rhs = space_commutator(&f1, &g, &kernel)
            .unwrap()
            .add(&space_commutator(&f2, &g, &kernel).unwrap());
        assert!(sum_lhs.sub(&sum_rhs).max_abs() <= 1e-10);
    }

    #[test]
    fn field_commutator_scaling_and_stable_prefactor() {
        let grid = Grid::square(256).unwrap();
        let alpha = 0.5;
        let f = synth::rough_field(grid, alpha, 7, synth::SynthMode::Scalar).unwrap();
        let g = PeriodicField::from_fn(grid, |x| x[0].sin());
        let eps_list = scaling::default_eps_ladder(&grid);
        let mut points = Vec::new();
        for &eps in &eps_list {
            let kernel = kernel_for(&grid, eps);
            let c = space_commutator(&f, &g, &kernel).unwrap();
            points.push((eps, c.lp_norm(2.0).unwrap()));
        }
        let report = scaling::build_report("field-commutator", points.clone(), alpha, 0.1);
        assert!(
            !report.verdict.failed(),
            "slope {} below {}",
            report.fitted_slope(),
            alpha - 0.1
        );
        // prefactor stability across the two halves of the ladder
        let half = points.len() / 2;
        let lo_fit = scaling::fit_loglog(&points[..half]).unwrap();
        let hi_fit = scaling::fit_loglog(&points[half..]).unwrap();
        // compare C = value / eps^alpha geometric means per half
        let c_of = |pts: &[(f64, f64)]| {
            let mut log_c = 0.0;
            for &(e, v) in pts {
                log_c += (v / e.powf(alpha)).ln();
            }
            (log_c / pts.len() as f64).exp()
        };
        let c_lo = c_of(&points[..half]);
        let c_hi = c_of(&points[half..]);
        let ratio = c_hi / c_lo;
        assert!(
            (0.8..=1.25).contains(&ratio),
            "prefactor drift {ratio} (fits {:.3}/{:.3})",
            lo_fit.slope,
            hi_fit.slope
        );
    }

    #[test]
    fn derivative_commutator_space_matches_oracle_and_decays() {
        let grid = Grid::square(64).unwrap();
        let f = PeriodicField::from_fn(grid, |x| x[0].sin());
        let g = PeriodicField::from_fn(grid, |x| x[0].cos());
        // stencil oracle: compute [d(fg)]^eps and d(f g^eps) by quadrature
        // convolution + spectral derivative at two eps values
        for eps in [0.4, 0.8] {
            let kernel = kernel_for(&grid, eps);
            let c = derivative_commutator_space(&f, &g, 0, &kernel).unwrap();
            let dfg = f.mul_pointwise(&g).derivative(0).unwrap();
            let lhs = mollify_space(&dfg, &kernel).unwrap();
            let rhs = f
                .mul_pointwise(&mollify_space(&g, &kernel).unwrap())
                .derivative(0)
                .unwrap();
            let oracle = lhs.sub(&rhs);
            assert!(c.sub(&oracle).max_abs() <= 1e-12);
        }
        // norm decays as eps -> 0
        let n_big = {
            let k = kernel_for(&grid, 0.8);
            derivative_commutator_space(&f, &g, 0, &k)
                .unwrap()
                .lp_norm(2.0)
                .unwrap()
        };
        let n_small = {
            let k = kernel_for(&grid, 0.2);
            derivative_commutator_space(&f, &g, 0, &k)
                .unwrap()
                .lp_norm(2.0)
                .unwrap()
        };
        assert!(n_small < n_big, "{n_small} !< {n_big}");
    }

    #[test]
    fn derivative_commutator_constant_f_is_zero() {
        let grid = Grid::square(32).unwrap();
        let f = PeriodicField::constant(grid, 1, 2.0);
        let g = PeriodicField::from_fn(grid, |x| x[1].sin());
        let kernel = kernel_for(&grid, 0.6);
        let c = derivative_commutator_space(&f, &g, 1, &kernel).unwrap();
        assert!(c.max_abs() <= 1e-12);
    }

    #[test]
    fn separable_fast_path_matches_general_streaming() {
        use crate::flow::SnapshotSource;
        let grid = Grid::square(32).unwrap();
        let rho = PeriodicField::from_fn(grid, |x| 2.0 + 0.5 * x[0].sin() * x[1].sin());
        let u_base = synth::rough_field(grid, 0.5, 9, synth::SynthMode::DivFreeVector).unwrap();
        let eps = 1.0;
        let dt = eps / 4.0;
        let count = 41;
        let amp = synth::LacunaryScalar::new(0.5, 10.0, 3, 4).unwrap();
        let source =
            synth::SeparableSource::new(rho, u_base, amp, 0.0, dt, count).unwrap();
        // materialized trajectory takes the general ring-buffer path
        let traj = source.materialize().unwrap();
        assert!(traj.separable().is_none());
        let psi = TestFunction::smooth_compact(3.0, 7.0, 1.0);
        let exps = HolderExponents::new(f64::INFINITY, 3.0);
        for variant in [Variant::Thm1, Variant::Thm2] {
            let fast =
                evaluate_terms(&source, &psi, KernelShape::CompactBump, eps, variant, exps)
                    .unwrap();
            let slow =
                evaluate_terms(&traj, &psi, KernelShape::CompactBump, eps, variant, exps)
                    .unwrap();
            for (a, b, name) in [
                (fast.a_total, slow.a_total, "A"),
                (fast.b_total, slow.b_total, "B"),
                (fast.b1, slow.b1, "B1"),
                (fast.b2, slow.b2, "B2"),
                (fast.psi_t_kinetic, slow.psi_t_kinetic, "kinetic"),
            ] {
                let scale = a.abs().max(b.abs()).max(1e-12);
                assert!(
                    (a - b).abs() <= 1e-10 * scale,
                    "{name}: fast {a} vs general {b}"
                );
            }
        }
    }

    #[test]
    fn thm1_split_reassembles_and_matches_unsplit_form() {
        use crate::flow::SnapshotSource;
        let grid = Grid::square(32).unwrap();
        let rho = PeriodicField::from_fn(grid, |x| 2.0 + 0.5 * x[0].sin() * x[1].sin());
        let u_base = synth::rough_field(grid, 0.4, 3, synth::SynthMode::DivFreeVector).unwrap();
        let eps = 1.0;
        let amp = synth::LacunaryScalar::new(0.6, 10.0, 3, 8).unwrap();
        let source =
            synth::SeparableSource::new(rho, u_base, amp, 0.0, eps / 4.0, 41).unwrap();
        let psi = TestFunction::smooth_compact(3.0, 7.0, 1.0);
        let exps = HolderExponents::new(f64::INFINITY, 3.0);
        let terms = evaluate_terms(
            &source,
            &psi,
            KernelShape::CompactBump,
            eps,
            Variant::Thm1,
            exps,
        )
        .unwrap();
        // signed split pieces reassemble
        let sum = terms.b1_signed + terms.b2_signed;
        assert!(
            (sum - terms.b_total).abs() <= 1e-12 * terms.b_total.abs().max(1e-12),
            "b1+b2 = {sum} vs b_total = {}",
            terms.b_total
        );
        assert!(terms.triangle_ok());
        // integrated-by-parts form equals the pre-IBP weak form
        let unsplit = term_b_unsplit(&source, &psi, KernelShape::CompactBump, eps).unwrap();
        let scale = terms.b_total.abs().max(unsplit.abs()).max(1e-12);
        assert!(
            (terms.b_total - unsplit).abs() <= 1e-8 * scale,
            "IBP b_total {} vs unsplit {unsplit}",
            terms.b_total
        );
        let _ = source.len();
    }

    #[test]
    fn steady_constant_density_terms_vanish() {
        // rho constant, u steady: commutators vanish identically
        let grid = Grid::square(32).unwrap();
        let rho = PeriodicField::constant(grid, 1, 1.5);
        let u_base = synth::rough_field(grid, 0.5, 2, synth::SynthMode::DivFreeVector).unwrap();
        let steady = synth::LacunaryScalar::constant();
        let source = synth::SeparableSource::new(rho, u_base, steady, 0.0, 0.25, 41).unwrap();
        let psi = TestFunction::smooth_compact(3.0, 7.0, 1.0);
        let exps = HolderExponents::new(f64::INFINITY, 3.0);
        let terms = evaluate_terms(
            &source,
            &psi,
            KernelShape::CompactBump,
            1.0,
            Variant::Thm1,
            exps,
        )
        .unwrap();
        assert!(terms.a_total.abs() <= 1e-10, "A = {}", terms.a_total);
        // B1 vanishes when rho commutes trivially
        assert!(terms.b1 <= 1e-10, "B1 = {}", terms.b1);
    }

    #[test]
    fn psi_zero_gives_zero_terms() {
        let grid = Grid::square(32).unwrap();
        let rho = PeriodicField::constant(grid, 1, 1.0);
        let u_base = synth::rough_field(grid, 0.5, 2, synth::SynthMode::DivFreeVector).unwrap();
        let amp = synth::LacunaryScalar::new(0.5, 10.0, 3, 1).unwrap();
        let source = synth::SeparableSource::new(rho, u_base, amp, 0.0, 0.25, 41).unwrap();
        // support placed inside the range but psi == 0 via zero scaling is
        // not constructible; instead verify the support check rejects a psi
        // whose inflated support leaves the range
        let psi_bad = TestFunction::smooth_compact(0.1, 9.9, 1.0);
        let exps = HolderExponents::new(f64::INFINITY, 3.0);
        match evaluate_terms(
            &source,
            &psi_bad,
            KernelShape::CompactBump,
            1.0,
            Variant::Thm1,
            exps,
        ) {
            Err(Error::SupportOutOfRange { .. }) => {}
            other => panic!("expected support rejection, got {other:?}"),
        }
    }

    #[test]
    fn holder_bookkeeping() {
        assert!((holder_conjugate(4.0, 6.0) - 2.4).abs() < 1e-12);
        assert!((holder_conjugate(f64::INFINITY, 6.0) - 6.0).abs() < 1e-12);
        assert!(holder_conjugate(f64::INFINITY, f64::INFINITY).is_infinite());
    }
}
