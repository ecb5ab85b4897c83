//! Scenario orchestration: each verb wires synthetic inputs or solver runs
//! into the measurement modules and emits CSV artifacts, optional SVG
//! plots, and a machine-readable summary.

use std::error::Error;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use bolab::besov::{self, BesovParams};
use bolab::commutator::{self, predicted_slopes, HolderExponents, PredictedSlopes, Variant};
use bolab::energy;
use bolab::field::PeriodicField;
use bolab::flow::{FlowState, FlowTrajectory};
use bolab::mollify::{self, KernelShape};
use bolab::scaling::{self, ScalingReport};
use bolab::solver::{self, InitKind, SolverConfig};
use bolab::synth;
use bolab::testfn::TestFunction;
use bolab::Grid;

use crate::config::{Config, ConfigError};
use crate::report::{self, CheckRecord};

pub const SCENARIOS: [&str; 7] = [
    "mollifier-check",
    "besov-estimate",
    "commutator-sweep",
    "evolve",
    "energy-audit",
    "thm1-suite",
    "thm2-suite",
];

pub struct Context {
    pub config: Config,
    pub out_dir: PathBuf,
    pub seed: u64,
}

pub struct Outcome {
    pub checks: Vec<CheckRecord>,
}

impl Outcome {
    pub fn failed(&self) -> bool {
        self.checks.iter().any(|c| c.failing)
    }
}

type ScenarioResult = Result<Outcome, Box<dyn Error>>;

fn cfg_err(message: String) -> Box<dyn Error> {
    Box::new(ConfigError {
        line: None,
        message,
    })
}

pub fn run_scenario(name: &str, ctx: &Context) -> ScenarioResult {
    match name {
        "mollifier-check" => mollifier_check(ctx),
        "besov-estimate" => besov_estimate(ctx),
        "commutator-sweep" => commutator_sweep(ctx),
        "evolve" => evolve(ctx),
        "energy-audit" => energy_audit(ctx),
        "thm1-suite" => thm_suite(ctx, Variant::Thm1),
        "thm2-suite" => thm_suite(ctx, Variant::Thm2),
        other => Err(cfg_err(format!(
            "unknown scenario `{other}`; expected one of {SCENARIOS:?}"
        ))),
    }
}

fn shape_from(config: &Config) -> Result<KernelShape, Box<dyn Error>> {
    match config.string("kernel.shape", "bump").as_str() {
        "bump" => Ok(KernelShape::CompactBump),
        "gaussian" => Ok(KernelShape::TruncatedGaussian),
        other => Err(cfg_err(format!(
            "kernel.shape must be bump or gaussian, got `{other}`"
        ))),
    }
}

fn grid_from(config: &Config, default_res: usize) -> Result<Grid, Box<dyn Error>> {
    let res = config.usize("grid.resolution", default_res)?;
    Ok(Grid::square(res)?)
}

fn write_artifact(ctx: &Context, name: &str, body: &str) -> Result<(), Box<dyn Error>> {
    report::write_text(&ctx.out_dir.join(name), body)?;
    Ok(())
}

fn maybe_plot(ctx: &Context, plots: bool, name: &str, rep: &ScalingReport) -> Result<(), Box<dyn Error>> {
    if plots {
        write_artifact(ctx, name, &report::scaling_svg(rep))?;
    }
    Ok(())
}

fn alpha_label(alpha: f64) -> String {
    format!("{alpha:.2}").replace('.', "p")
}

// ---------------------------------------------------------------------
// mollifier-check

fn mollifier_check(ctx: &Context) -> ScenarioResult {
    let config = &ctx.config;
    let grid = grid_from(config, 1024)?;
    let alphas = config.f64_list("field.alpha", &[0.3, 0.5, 0.7])?;
    let p = config.f64("norm.p", 2.0)?;
    let shape = shape_from(config)?;
    let tolerance = config.f64("sweep.tolerance", 0.1)?;
    let plots = config.bool("output.plots", false)?;
    let eps = scaling::default_eps_ladder(&grid);
    let mut checks = Vec::new();
    let mut csv = String::from("epsilon,quantity,value\n");
    for &alpha in &alphas {
        let w = synth::rough_field(grid, alpha, ctx.seed, synth::SynthMode::Scalar)?;
        let rates = mollify::mollifier_rate_check(&w, alpha, p, &eps, shape, tolerance)?;
        let tag = alpha_label(alpha);
        csv.push_str(&rates.convergence.csv_rows());
        csv.push_str(&rates.gradient.csv_rows());
        let conv_slope = rates.convergence.fitted_slope();
        checks.push(CheckRecord::measurement(
            &format!("mollify-convergence-a{tag}"),
            "mollify",
            &format!("slope of |w^eps - w| equals {alpha} within {tolerance}"),
            conv_slope,
            alpha,
            (conv_slope - alpha).abs() <= tolerance,
        ));
        checks.push(CheckRecord::from_scaling(
            &rates.gradient,
            "mollify",
            &format!("grad w^eps grows no faster than eps^({:.2})", alpha - 1.0),
        ));
        maybe_plot(ctx, plots, &format!("mollifier_conv_a{tag}.svg"), &rates.convergence)?;
        maybe_plot(ctx, plots, &format!("mollifier_grad_a{tag}.svg"), &rates.gradient)?;
    }
    write_artifact(ctx, "mollifier_rates.csv", &csv)?;
    Ok(Outcome { checks })
}

// ---------------------------------------------------------------------
// besov-estimate

fn besov_estimate(ctx: &Context) -> ScenarioResult {
    let config = &ctx.config;
    let p = config.f64("norm.p", 2.0)?;
    let mut checks = Vec::new();
    let mut csv = String::from("field,magnitude,increment_norm\n");

    if let Some(path) = config.raw("input.checkpoint") {
        let (field, _) = bolab::io::read_field(Path::new(path))?;
        let est = besov::estimate_exponent(&field, p)?;
        for &(m, v) in &est.table {
            let _ = writeln!(csv, "checkpoint,{m:.12e},{v:.12e}");
        }
        checks.push(CheckRecord::measurement(
            "checkpoint-alpha-hat",
            "besov",
            "fitted regularity exponent (informational)",
            est.alpha_hat,
            f64::NAN,
            true,
        ));
        write_artifact(ctx, "besov_increments.csv", &csv)?;
        return Ok(Outcome { checks });
    }

    let grid = grid_from(config, 1024)?;
    let alphas = config.f64_list("field.alpha", &[0.3, 0.5, 0.7])?;
    let mode = match config.string("field.mode", "scalar").as_str() {
        "scalar" => synth::SynthMode::Scalar,
        "divfree" => synth::SynthMode::DivFreeVector,
        other => return Err(cfg_err(format!("field.mode must be scalar or divfree, got `{other}`"))),
    };
    let tol = config.f64("estimate.tolerance", 0.05)?;
    let octaves = config.usize("field.octaves", synth::max_octave(&grid))?;
    for &alpha in &alphas {
        let w = synth::rough_field_with_octaves(grid, alpha, ctx.seed, mode, octaves)?;
        let est = besov::estimate_exponent(&w, p)?;
        let tag = alpha_label(alpha);
        for &(m, v) in &est.table {
            let _ = writeln!(csv, "a{tag},{m:.12e},{v:.12e}");
        }
        checks.push(CheckRecord::measurement(
            &format!("alpha-hat-a{tag}"),
            "besov",
            &format!("lacunary field recovers alpha within {tol}"),
            est.alpha_hat,
            alpha,
            (est.alpha_hat - alpha).abs() <= tol,
        ));
    }
    if config.bool("controls", true)? {
        // constant: increments vanish and the estimator flags it
        let constant = PeriodicField::constant(grid, 1, 2.0);
        let params = BesovParams::new(0.5, p, 16)?;
        let est = besov::besov_norm(&constant, &params)?;
        checks.push(CheckRecord::measurement(
            "control-constant-increments",
            "besov",
            "constant field has zero increment part",
            est.increment_sup,
            0.0,
            est.increment_sup == 0.0,
        ));
        let flagged = matches!(
            besov::estimate_exponent(&constant, p),
            Err(bolab::Error::NoIncrements)
        );
        checks.push(CheckRecord::condition(
            "control-constant-flagged",
            "besov",
            "constant field reports no increments",
            flagged,
        ));
        let smooth = PeriodicField::from_fn(grid, |x| x[0].sin());
        let est = besov::estimate_exponent(&smooth, p)?;
        checks.push(CheckRecord::measurement(
            "control-smooth",
            "besov",
            "smooth field saturates the window (alpha-hat >= 0.95)",
            est.alpha_hat,
            0.95,
            est.alpha_hat >= 0.95,
        ));
        let noise = synth::white_noise(grid, ctx.seed ^ 0xabcdef);
        let est = besov::estimate_exponent(&noise, p)?;
        checks.push(CheckRecord::measurement(
            "control-white-noise",
            "besov",
            "white noise estimates near zero (|alpha-hat| <= 0.1)",
            est.alpha_hat,
            0.0,
            est.alpha_hat.abs() <= 0.1,
        ));
    }
    write_artifact(ctx, "besov_increments.csv", &csv)?;
    Ok(Outcome { checks })
}

// ---------------------------------------------------------------------
// commutator-sweep

struct SweepSetup {
    grid: Grid,
    rho: PeriodicField,
    u_base: PeriodicField,
    psi: TestFunction,
    t_total: f64,
    beta: f64,
    eps_list: Vec<f64>,
    exps: HolderExponents,
    shape: KernelShape,
    tolerance: f64,
    seed: u64,
}

fn sweep_setup(ctx: &Context, alpha: f64) -> Result<SweepSetup, Box<dyn Error>> {
    let config = &ctx.config;
    let grid = grid_from(config, 512)?;
    let beta = config.f64("field.beta", 0.4)?;
    let p = config.f64("exponents.p", f64::INFINITY)?;
    let q = config.f64("exponents.q", 6.0)?;
    let rho = match config.string("rho.kind", "smooth").as_str() {
        "constant" => PeriodicField::constant(grid, 1, config.f64("rho.base", 1.0)?),
        "smooth" => {
            let base = config.f64("rho.base", 2.0)?;
            let amp = config.f64("rho.amp", 0.5)?;
            PeriodicField::from_fn(grid, move |x| base + amp * x[0].sin() * x[1].sin())
        }
        other => return Err(cfg_err(format!("rho.kind must be constant or smooth, got `{other}`"))),
    };
    let u_base = synth::rough_field(grid, alpha, ctx.seed, synth::SynthMode::DivFreeVector)?;
    let t_total = config.f64("time.span", 3.4)?;
    let psi = TestFunction::smooth_compact(
        config.f64("psi.lo", 1.0)?,
        config.f64("psi.hi", 2.6)?,
        config.f64("psi.edge", 0.3)?,
    );
    Ok(SweepSetup {
        grid,
        rho,
        u_base,
        psi,
        t_total,
        beta,
        eps_list: scaling::default_eps_ladder(&grid),
        exps: HolderExponents::new(p, q),
        shape: shape_from(config)?,
        tolerance: config.f64("sweep.tolerance", 0.1)?,
        seed: ctx.seed,
    })
}

fn run_term_sweep(
    setup: &SweepSetup,
    variant: Variant,
    predicted: PredictedSlopes,
) -> Result<commutator::TermSweepReport, Box<dyn Error>> {
    let make = |eps: f64| -> bolab::Result<synth::SeparableSource> {
        let dt = eps / 4.0;
        let count = (setup.t_total / dt).ceil() as usize + 1;
        let amp = synth::LacunaryScalar::new(setup.beta, setup.t_total, 6, setup.seed ^ 0x5eed)?;
        synth::SeparableSource::new(
            setup.rho.clone(),
            setup.u_base.clone(),
            amp,
            0.0,
            dt,
            count,
        )
    };
    Ok(commutator::term_sweep(
        make,
        &setup.psi,
        setup.shape,
        &setup.eps_list,
        variant,
        setup.exps,
        predicted,
        setup.tolerance,
    )?)
}

fn sweep_checks(report: &commutator::TermSweepReport, checks: &mut Vec<CheckRecord>) {
    let claims: Vec<(&ScalingReport, String)> = {
        let mut v = vec![
            (
                &report.a_report,
                if report.variant == Variant::Thm1 {
                    "A term vanishes (no claimed rate)".to_string()
                } else {
                    "A term decay".to_string()
                },
            ),
            (
                &report.b1_report,
                format!("claimed decay eps^{:.2}", report.b1_report.predicted_slope),
            ),
            (
                &report.b2_report,
                format!("claimed decay eps^{:.2}", report.b2_report.predicted_slope),
            ),
        ];
        if let Some(a2) = &report.a2_report {
            v.push((a2, format!("claimed decay eps^{:.2}", a2.predicted_slope)));
        }
        v
    };
    for (rep, claim) in claims {
        checks.push(CheckRecord::from_scaling(rep, "commutator", &claim));
    }
}

fn commutator_sweep(ctx: &Context) -> ScenarioResult {
    let config = &ctx.config;
    let variant = match config.string("variant", "thm1").as_str() {
        "thm1" => Variant::Thm1,
        "thm2" => Variant::Thm2,
        other => return Err(cfg_err(format!("variant must be thm1 or thm2, got `{other}`"))),
    };
    let alpha = config.f64("field.alpha", 0.5)?;
    let setup = sweep_setup(ctx, alpha)?;
    let predicted = predicted_slopes(variant, alpha, setup.beta);
    let report = run_term_sweep(&setup, variant, predicted)?;
    write_artifact(ctx, "commutator_sweep.csv", &report.csv())?;
    write_artifact(ctx, "commutator_summary.txt", &report.summary())?;
    let plots = config.bool("output.plots", false)?;
    maybe_plot(ctx, plots, "term_b1.svg", &report.b1_report)?;
    maybe_plot(ctx, plots, "term_b2.svg", &report.b2_report)?;
    let mut checks = Vec::new();
    sweep_checks(&report, &mut checks);
    Ok(Outcome { checks })
}

// ---------------------------------------------------------------------
// evolve

fn init_from(config: &Config, seed: u64) -> Result<InitKind, Box<dyn Error>> {
    let kind = config.string("init.kind", "taylor-green");
    Ok(match kind.as_str() {
        "taylor-green" => InitKind::TaylorGreen {
            rho_base: config.f64("init.rho_base", 1.0)?,
            rho_amp: config.f64("init.rho_amp", 0.0)?,
            vel_amp: config.f64("init.vel_amp", 1.0)?,
        },
        "shear-layer" => InitKind::ShearLayer {
            width: config.f64("init.width", 0.3)?,
            perturb: config.f64("init.perturb", 0.05)?,
            rho_base: config.f64("init.rho_base", 1.5)?,
            rho_amp: config.f64("init.rho_amp", 0.3)?,
        },
        "rayleigh-taylor-like" => InitKind::RayleighTaylorLike {
            rho_base: config.f64("init.rho_base", 2.0)?,
            contrast: config.f64("init.contrast", 0.8)?,
            width: config.f64("init.width", 0.4)?,
            perturb: config.f64("init.perturb", 0.05)?,
        },
        "synthetic" => InitKind::Synthetic {
            alpha: config.f64("init.alpha", 0.5)?,
            seed: config.u64("init.seed", seed)?,
            amplitude: config.f64("init.amplitude", 0.2)?,
        },
        "from-checkpoint" => {
            let path = config
                .raw("init.checkpoint")
                .ok_or_else(|| cfg_err("init.kind = from-checkpoint needs init.checkpoint".into()))?;
            InitKind::FromCheckpoint(PathBuf::from(path))
        }
        other => return Err(cfg_err(format!("unknown init.kind `{other}`"))),
    })
}

fn evolve(ctx: &Context) -> ScenarioResult {
    let config = &ctx.config;
    let grid = grid_from(config, 128)?;
    let mut solver_config = SolverConfig::new(
        grid,
        config.f64("time.dt", 0.01)?,
        config.f64("time.T", 1.0)?,
        init_from(config, ctx.seed)?,
    );
    solver_config.rho_min = config.f64("solver.rho_min", 1e-3)?;
    solver_config.snapshot_every = config.usize("output.every", 10)?;
    let (traj, log) = solver::run(&solver_config)?;
    write_artifact(ctx, "run_log.csv", &log.csv())?;
    for (i, state) in traj.states().iter().enumerate() {
        state.write_checkpoint(&ctx.out_dir.join(format!("state_{i:04}.bolab")))?;
    }
    let mass0 = log.rows[0].mass;
    let mass_drift = log
        .rows
        .iter()
        .map(|r| ((r.mass - mass0) / mass0).abs())
        .fold(0.0, f64::max);
    let max_div = log.rows.iter().map(|r| r.div_residual).fold(0.0, f64::max);
    let e0 = log.rows[0].energy;
    let energy_drift = log
        .rows
        .iter()
        .map(|r| (r.energy - e0).abs() / e0.max(1e-30))
        .fold(0.0, f64::max);
    let checks = vec![
        CheckRecord::measurement(
            "mass-conservation",
            "euler_solver",
            "relative mass drift <= 1e-10",
            mass_drift,
            1e-10,
            mass_drift <= 1e-10,
        ),
        CheckRecord::measurement(
            "incompressibility",
            "euler_solver",
            "max |div u| <= 1e-9",
            max_div,
            1e-9,
            max_div <= 1e-9,
        ),
        CheckRecord::measurement(
            "energy-drift",
            "euler_solver",
            "relative energy drift (informational)",
            energy_drift,
            f64::NAN,
            true,
        ),
    ];
    Ok(Outcome { checks })
}

// ---------------------------------------------------------------------
// energy-audit

fn read_trajectory(dir: &Path) -> Result<FlowTrajectory, Box<dyn Error>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("state_") && n.ends_with(".bolab"))
        })
        .collect();
    paths.sort();
    if paths.len() < 2 {
        return Err(cfg_err(format!(
            "{} holds {} state checkpoints; need at least 2",
            dir.display(),
            paths.len()
        )));
    }
    let states: Vec<FlowState> = paths
        .iter()
        .map(|p| FlowState::read_checkpoint(p))
        .collect::<bolab::Result<_>>()?;
    Ok(FlowTrajectory::from_states(states)?)
}

fn energy_audit(ctx: &Context) -> ScenarioResult {
    let config = &ctx.config;
    let input = config
        .raw("input.dir")
        .ok_or_else(|| cfg_err("energy-audit needs input.dir (an evolve output directory)".into()))?;
    let traj = read_trajectory(Path::new(input))?;
    let report = energy::energy_report(&traj)?;
    let div: Vec<f64> = traj.states().iter().map(|s| s.div_residual()).collect();
    write_artifact(ctx, "energy_audit.csv", &report.csv(&div))?;

    let span = traj.end_time() - traj.start_time();
    let gap_tol = config.f64("window.gap_tol", 1e-6)?;
    let eps_list = config.f64_list("window.eps", &[span / 16.0, span / 8.0])?;
    let count = config.usize("window.count", 4)?;
    let mut table = String::from("t_tilde,eps,windowed_mean,E0,gap\n");
    let mut worst_gap: f64 = 0.0;
    for &eps in &eps_list {
        for k in 0..count {
            let t_tilde = traj.start_time()
                + eps / 2.0
                + (span - eps) * (k as f64 + 0.5) / count as f64;
            let check = energy::window_check(&traj, t_tilde, eps)?;
            table.push_str(&check.csv_row());
            worst_gap = worst_gap.max(check.gap);
        }
    }
    write_artifact(ctx, "window_table.csv", &table)?;

    let mut checks = vec![CheckRecord::measurement(
        "window-gap",
        "energy_audit",
        &format!("windowed mean of E matches E(0) within {gap_tol:.1e}"),
        worst_gap,
        gap_tol,
        worst_gap <= gap_tol,
    )];
    if let Some(trend) = report.continuity.sqrt_trend {
        checks.push(CheckRecord::measurement(
            "sqrt-continuity-trend",
            "energy_audit",
            "||sqrt(rho)u - sqrt(rho0)u0|| vanishes as t -> 0 (positive slope)",
            trend.slope,
            0.0,
            trend.slope > 0.0,
        ));
    }
    if let Some(trend) = report.continuity.w_trend {
        checks.push(CheckRecord::measurement(
            "w-trend",
            "energy_audit",
            "W(t) vanishes as t -> 0 (positive slope)",
            trend.slope,
            0.0,
            trend.slope > 0.0,
        ));
    }
    // weak-form residual at one mollification radius, when resolvable:
    // eps must cover both four snapshot steps and two grid spacings
    let eps_default = (4.0 * traj.time_step()).max(2.0 * traj.grid().spacing());
    let eps_res = config.f64("residual.eps", eps_default)?;
    let lo = config.f64("residual.psi_lo", traj.start_time() + 1.2 * eps_res)?;
    let hi = config.f64("residual.psi_hi", traj.end_time() - 1.2 * eps_res)?;
    if hi - lo > 4.0 * traj.time_step() && eps_res >= 4.0 * traj.time_step() {
        let edge = (hi - lo) / 4.0;
        let psi = TestFunction::smooth_compact(lo, hi, edge);
        let res = energy::weak_energy_residual(&traj, &psi, KernelShape::CompactBump, eps_res)?;
        checks.push(CheckRecord::measurement(
            "weak-energy-residual",
            "energy_audit",
            "weak-form identity residual within 1% of its terms",
            res.residual,
            0.01 * res.scale,
            !res.flagged_not_solution,
        ));
    }
    Ok(Outcome { checks })
}

// ---------------------------------------------------------------------
// hypothesis-graded suites

pub struct ExponentValidation {
    pub checks: Vec<CheckRecord>,
    pub eligible: bool,
    pub predicted: PredictedSlopes,
}

/// Grade the variant hypotheses and derive the predicted decay slopes.
pub fn validate_exponents(
    alpha: f64,
    beta: f64,
    p: f64,
    q: f64,
    variant: Variant,
) -> ExponentValidation {
    let mut checks = Vec::new();
    let mut eligible = true;
    match variant {
        Variant::Thm1 => {
            let ip = if p.is_infinite() { 0.0 } else { 1.0 / p };
            for (name, holds, verdict_when_false, claim) in [
                (
                    "integrability",
                    ip + 3.0 / q <= 1.0 + 1e-12,
                    "ineligible",
                    format!("1/p + 3/q <= 1 (p = {p}, q = {q})"),
                ),
                (
                    "alpha-threshold",
                    alpha > 1.0 / 3.0,
                    "no-guaranteed-decay",
                    format!("alpha > 1/3 (alpha = {alpha})"),
                ),
            ] {
                eligible &= holds;
                let mut r = CheckRecord::condition(name, "lab_cli", &claim, holds);
                if !holds {
                    // hypothesis violations are informational: the suite
                    // still measures, it just guarantees nothing
                    r.failing = false;
                    r.verdict = verdict_when_false.to_string();
                }
                checks.push(r);
            }
        }
        Variant::Thm2 => {
            for (name, holds, claim) in [
                ("p-range", p >= 3.0, format!("p >= 3 (p = {p})")),
                ("q-range", q >= 3.0, format!("q >= 3 (q = {q})")),
                (
                    "mixed-threshold-1",
                    2.0 * alpha + beta > 1.0,
                    format!("2a + b > 1 (= {:.3})", 2.0 * alpha + beta),
                ),
                (
                    "mixed-threshold-2",
                    alpha + 2.0 * beta > 1.0,
                    format!("a + 2b > 1 (= {:.3})", alpha + 2.0 * beta),
                ),
            ] {
                eligible &= holds;
                let mut r = CheckRecord::condition(name, "lab_cli", &claim, holds);
                if !holds {
                    r.failing = false;
                    r.verdict = "ineligible".to_string();
                }
                checks.push(r);
            }
        }
    }
    ExponentValidation {
        checks,
        eligible,
        predicted: predicted_slopes(variant, alpha, beta),
    }
}

fn thm_suite(ctx: &Context, variant: Variant) -> ScenarioResult {
    let config = &ctx.config;
    let alpha = config.f64("field.alpha", if variant == Variant::Thm1 { 0.5 } else { 0.4 })?;
    let beta = config.f64("field.beta", 0.4)?;
    let p = config.f64("exponents.p", if variant == Variant::Thm1 { f64::INFINITY } else { 3.0 })?;
    let q = config.f64("exponents.q", if variant == Variant::Thm1 { 6.0 } else { 3.0 })?;
    let plots = config.bool("output.plots", false)?;

    let validation = validate_exponents(alpha, beta, p, q, variant);
    let mut checks = validation.checks;

    if variant == Variant::Thm2 && !validation.eligible {
        // ineligible exponent pairs are rejected before any sweep runs
        return Ok(Outcome { checks });
    }

    let setup = sweep_setup(ctx, alpha)?;

    // regularity of the synthetic battery
    let est = besov::estimate_exponent(&setup.u_base, 2.0)?;
    checks.push(CheckRecord::measurement(
        "battery-alpha-hat",
        "besov",
        "synthetic u carries the requested spatial exponent (+-0.05)",
        est.alpha_hat,
        alpha,
        (est.alpha_hat - alpha).abs() <= 0.05,
    ));

    if variant == Variant::Thm1 {
        // mollifier rates on the same battery
        let scalar = synth::rough_field(setup.grid, alpha, ctx.seed ^ 1, synth::SynthMode::Scalar)?;
        let rates = mollify::mollifier_rate_check(
            &scalar,
            alpha,
            2.0,
            &setup.eps_list,
            setup.shape,
            setup.tolerance,
        )?;
        checks.push(CheckRecord::from_scaling(
            &rates.convergence,
            "mollify",
            &format!("convergence at least eps^{alpha:.2}"),
        ));
        checks.push(CheckRecord::from_scaling(
            &rates.gradient,
            "mollify",
            &format!("gradient no worse than eps^({:.2})", alpha - 1.0),
        ));
    }

    let report = run_term_sweep(&setup, variant, validation.predicted)?;
    write_artifact(ctx, "commutator_sweep.csv", &report.csv())?;
    write_artifact(ctx, "commutator_summary.txt", &report.summary())?;
    maybe_plot(ctx, plots, "term_b1.svg", &report.b1_report)?;
    maybe_plot(ctx, plots, "term_b2.svg", &report.b2_report)?;
    sweep_checks(&report, &mut checks);
    Ok(Outcome { checks })
}
