//! Lacunary synthetic fields of prescribed fractional regularity.
//!
//! The constructions are dyadic Weierstrass-type sums: octave j carries
//! wavevectors of magnitude 2^j with amplitude 2^(-j*alpha) and seeded
//! random phases. Increments then scale like |xi|^alpha across every scale
//! the grid resolves, which makes these fields exact test inputs for the
//! regularity estimators and the commutator sweeps.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::PeriodicField;
use crate::flow::{FlowState, FlowTrajectory, SnapshotSource};
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthMode {
    Scalar,
    /// perp-gradient of a scalar potential; exactly divergence-free. 2D only.
    DivFreeVector,
}

fn validate_exponent(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!(
            "regularity exponent must lie in (0,1), got {alpha}"
        )));
    }
    Ok(())
}

/// Largest dyadic octave resolvable under the 2/3 rule.
pub fn max_octave(grid: &Grid) -> usize {
    let mut j = 0usize;
    while (1usize << (j + 1)) as i64 <= grid.dealias_cutoff() {
        j += 1;
    }
    j
}

/// Direction multipliers per octave: the coordinate axes plus the main
/// diagonal.
fn octave_directions(dim: usize) -> Vec<Vec<i64>> {
    let mut dirs: Vec<Vec<i64>> = (0..dim)
        .map(|a| (0..dim).map(|b| i64::from(a == b)).collect())
        .collect();
    dirs.push(vec![1; dim]);
    dirs
}

/// Deposit `amp * cos(k.x + phase)` into a spectral coefficient table.
fn add_mode(
    coeffs: &mut [Complex<f64>],
    grid: &Grid,
    k: &[i64],
    amp: f64,
    phase: f64,
) {
    let n = grid.resolution() as i64;
    let mut idx_pos = 0usize;
    let mut idx_neg = 0usize;
    for a in 0..grid.dim() {
        let slot_pos = k[a].rem_euclid(n) as usize;
        let slot_neg = (-k[a]).rem_euclid(n) as usize;
        idx_pos = idx_pos * n as usize + slot_pos;
        idx_neg = idx_neg * n as usize + slot_neg;
    }
    let half = 0.5 * amp;
    coeffs[idx_pos] += Complex::from_polar(half, phase);
    coeffs[idx_neg] += Complex::from_polar(half, -phase);
}

fn lacunary_coefficients(
    grid: &Grid,
    alpha: f64,
    rng: &mut ChaCha8Rng,
    potential: bool,
    octaves: usize,
) -> Vec<Complex<f64>> {
    let mut coeffs = vec![Complex::new(0.0, 0.0); grid.points()];
    let dirs = octave_directions(grid.dim());
    for j in 0..=octaves {
        let wave = 1i64 << j;
        let amp = 2f64.powf(-(j as f64) * alpha);
        for dir in &dirs {
            let k: Vec<i64> = dir.iter().map(|d| d * wave).collect();
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            let knorm = (k.iter().map(|&v| (v * v) as f64).sum::<f64>()).sqrt()
                * std::f64::consts::TAU
                / grid.length();
            // potentials divide by |k| so the velocity amplitude is amp
            let a = if potential { amp / knorm } else { amp };
            add_mode(&mut coeffs, grid, &k, a, phase);
        }
    }
    coeffs
}

fn field_from_coeffs(grid: Grid, coeffs: Vec<Complex<f64>>) -> PeriodicField {
    let mut data = coeffs;
    crate::fft::ndfft(&mut data, grid.resolution(), grid.dim(), false);
    PeriodicField::from_data(grid, 1, data.iter().map(|c| c.re).collect()).expect("sized")
}

/// Lacunary field with prescribed spatial exponent. Deterministic per seed.
pub fn rough_field(grid: Grid, alpha: f64, seed: u64, mode: SynthMode) -> Result<PeriodicField> {
    rough_field_with_octaves(grid, alpha, seed, mode, max_octave(&grid))
}

/// Same construction with an explicit octave count (capped at the 2/3-rule
/// resolution limit).
pub fn rough_field_with_octaves(
    grid: Grid,
    alpha: f64,
    seed: u64,
    mode: SynthMode,
    octaves: usize,
) -> Result<PeriodicField> {
    validate_exponent(alpha)?;
    let octaves = octaves.min(max_octave(&grid));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match mode {
        SynthMode::Scalar => Ok(field_from_coeffs(
            grid,
            lacunary_coefficients(&grid, alpha, &mut rng, false, octaves),
        )),
        SynthMode::DivFreeVector => {
            if grid.dim() != 2 {
                return Err(Error::Config("divergence-free synthesis is 2D only".into()));
            }
            let potential = field_from_coeffs(
                grid,
                lacunary_coefficients(&grid, alpha, &mut rng, true, octaves),
            );
            potential.perp_gradient()
        }
    }
}

/// Independent uniform samples in [-1, 1]; the zero-regularity control.
pub fn white_noise(grid: Grid, seed: u64) -> PeriodicField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = (0..grid.points())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    PeriodicField::from_data(grid, 1, data).expect("sized")
}

/// Scalar lacunary amplitude a(t) with exponent beta, bounded in [1, 2].
#[derive(Debug, Clone)]
pub struct LacunaryScalar {
    offset: f64,
    scale: f64,
    /// (amplitude, angular frequency, phase)
    modes: Vec<(f64, f64, f64)>,
}

impl LacunaryScalar {
    /// Geometric ladder with ratio sqrt(2) (half-octave spacing) over the
    /// given period: `octaves` dyadic octaves hold `2*octaves + 1` modes.
    /// The denser ladder keeps the log-periodic ripple of the increment
    /// statistics small enough for exponent fits.
    pub fn new(beta: f64, period: f64, octaves: usize, seed: u64) -> Result<Self> {
        validate_exponent(beta)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let levels = 2 * octaves;
        let mut modes = Vec::with_capacity(levels + 1);
        let mut bound = 0.0;
        for j in 0..=levels {
            let scale = 2f64.powf(j as f64 / 2.0);
            let amp = scale.powf(-beta);
            let freq = std::f64::consts::TAU * scale / period;
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            modes.push((amp, freq, phase));
            bound += amp;
        }
        Ok(Self {
            offset: 1.5,
            scale: 0.5 / bound,
            modes,
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let s: f64 = self
            .modes
            .iter()
            .map(|&(a, w, p)| a * (w * t + p).cos())
            .sum();
        self.offset + self.scale * s
    }

    /// Time-independent amplitude a(t) = 1 (steady flows).
    pub fn constant() -> Self {
        Self {
            offset: 1.0,
            scale: 0.0,
            modes: Vec::new(),
        }
    }
}

/// Separable space-time synthetic flow u(t, x) = a(t) U(x) with static
/// density. Snapshots are generated on demand.
#[derive(Debug, Clone)]
pub struct SeparableSource {
    grid: Grid,
    rho: PeriodicField,
    u_base: PeriodicField,
    amp: LacunaryScalar,
    t0: f64,
    dt: f64,
    count: usize,
}

impl SeparableSource {
    pub fn new(
        rho: PeriodicField,
        u_base: PeriodicField,
        amp: LacunaryScalar,
        t0: f64,
        dt: f64,
        count: usize,
    ) -> Result<Self> {
        if count < 2 || !(dt > 0.0) {
            return Err(Error::TrajectoryTooShort(format!(
                "separable source needs >= 2 snapshots with positive dt, got {count} at {dt}"
            )));
        }
        rho.same_grid(&u_base)?;
        Ok(Self {
            grid: *rho.grid(),
            rho,
            u_base,
            amp,
            t0,
            dt,
            count,
        })
    }

    pub fn amplitude(&self) -> &LacunaryScalar {
        &self.amp
    }

    pub fn base_velocity(&self) -> &PeriodicField {
        &self.u_base
    }

    /// Materialize as a trajectory (small runs only).
    pub fn materialize(&self) -> Result<FlowTrajectory> {
        let states = (0..self.count)
            .map(|i| FlowState {
                rho: self.rho.clone(),
                u: self.velocity(i),
                p: PeriodicField::zeros(self.grid, 1),
                t: self.time(i),
            })
            .collect();
        FlowTrajectory::from_states(states)
    }
}

impl SnapshotSource for SeparableSource {
    fn grid(&self) -> Grid {
        self.grid
    }
    fn len(&self) -> usize {
        self.count
    }
    fn time_step(&self) -> f64 {
        self.dt
    }
    fn start_time(&self) -> f64 {
        self.t0
    }
    fn density(&self, _i: usize) -> PeriodicField {
        self.rho.clone()
    }
    fn velocity(&self, i: usize) -> PeriodicField {
        self.u_base.scaled(self.amp.eval(self.time(i)))
    }
    fn separable(&self) -> Option<crate::flow::SeparableParts<'_>> {
        Some(crate::flow::SeparableParts {
            rho: &self.rho,
            u_base: &self.u_base,
            amplitudes: (0..self.count).map(|i| self.amp.eval(self.time(i))).collect(),
        })
    }
}

/// Separable rough trajectory: divergence-free lacunary U(x), lacunary
/// amplitude in time, unit density.
pub fn rough_trajectory(
    grid: Grid,
    alpha: f64,
    beta: f64,
    seed: u64,
    t_end: f64,
    count: usize,
) -> Result<FlowTrajectory> {
    if count < 2 {
        return Err(Error::TrajectoryTooShort("need >= 2 snapshots".into()));
    }
    let dt = t_end / (count - 1) as f64;
    let time_octaves = ((count as f64 / 4.0).log2().floor() as usize).max(2);
    let amp = LacunaryScalar::new(beta, t_end, time_octaves, seed ^ 0x9e3779b97f4a7c15)?;
    let u_base = rough_field(grid, alpha, seed, SynthMode::DivFreeVector)?;
    let source = SeparableSource::new(
        PeriodicField::constant(grid, 1, 1.0),
        u_base,
        amp,
        0.0,
        dt,
        count,
    )?;
    source.materialize()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let grid = Grid::square(64).unwrap();
        let a = rough_field(grid, 0.5, 7, SynthMode::Scalar).unwrap();
        let b = rough_field(grid, 0.5, 7, SynthMode::Scalar).unwrap();
        let c = rough_field(grid, 0.5, 8, SynthMode::Scalar).unwrap();
        assert_eq!(a.data(), b.data());
        assert!(a.sub(&c).max_abs() > 1e-6);
    }

    #[test]
    fn divfree_mode_is_divergence_free() {
        let grid = Grid::square(128).unwrap();
        let u = rough_field(grid, 0.4, 3, SynthMode::DivFreeVector).unwrap();
        assert_eq!(u.components(), 2);
        let div = u.divergence().unwrap().max_abs();
        assert!(div <= 1e-12 * u.max_abs().max(1.0), "div {div}");
    }

    #[test]
    fn rejects_bad_exponents() {
        let grid = Grid::square(32).unwrap();
        assert!(rough_field(grid, 0.0, 1, SynthMode::Scalar).is_err());
        assert!(rough_field(grid, 1.0, 1, SynthMode::Scalar).is_err());
        assert!(rough_field(grid, -0.2, 1, SynthMode::Scalar).is_err());
    }

    #[test]
    fn octaves_stay_below_dealias_cutoff() {
        let grid = Grid::square(1024).unwrap();
        let j = max_octave(&grid);
        assert!(1i64 << j <= grid.dealias_cutoff());
        assert!(1i64 << (j + 1) > grid.dealias_cutoff());
        // 1024 -> cutoff 341 -> top octave 256
        assert_eq!(j, 8);
    }

    #[test]
    fn lacunary_amplitude_bounded() {
        let amp = LacunaryScalar::new(0.6, 2.0, 5, 11).unwrap();
        for i in 0..500 {
            let v = amp.eval(i as f64 * 0.004);
            assert!((1.0..=2.0).contains(&v), "amplitude {v} out of range");
        }
    }

    #[test]
    fn separable_source_matches_materialized() {
        let grid = Grid::square(16).unwrap();
        let traj = rough_trajectory(grid, 0.5, 0.5, 3, 1.0, 16).unwrap();
        assert_eq!(traj.len(), 16);
        assert!((traj.end_time() - 1.0).abs() < 1e-12);
        // snapshots share the divergence-free property
        for s in traj.states() {
            assert!(s.div_residual() <= 1e-11);
        }
    }
}
