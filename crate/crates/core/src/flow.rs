//! Flow states and time-stamped trajectories.

use std::path::Path;

use crate::error::{Error, Result};
use crate::field::PeriodicField;
use crate::grid::Grid;
use crate::io;

/// One instant of a density-dependent incompressible flow.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub rho: PeriodicField,
    pub u: PeriodicField,
    pub p: PeriodicField,
    pub t: f64,
}

impl FlowState {
    pub fn new(rho: PeriodicField, u: PeriodicField, p: PeriodicField, t: f64) -> Self {
        debug_assert!(rho.is_scalar() && p.is_scalar());
        debug_assert_eq!(u.components(), rho.grid().dim());
        Self { rho, u, p, t }
    }

    pub fn grid(&self) -> &Grid {
        self.rho.grid()
    }

    /// Momentum field rho*u.
    pub fn momentum(&self) -> PeriodicField {
        let dim = self.grid().dim();
        let mut m = self.u.clone();
        for c in 0..dim {
            let rho = self.rho.component(0).to_vec();
            for (v, r) in m.component_mut(c).iter_mut().zip(&rho) {
                *v *= r;
            }
        }
        m
    }

    /// Spectral divergence residual max|div u|.
    pub fn div_residual(&self) -> f64 {
        self.u.divergence().map(|d| d.max_abs()).unwrap_or(f64::NAN)
    }

    pub fn min_rho(&self) -> f64 {
        self.rho
            .component(0)
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// Checkpoint as stacked blocks: rho, u components, P.
    pub fn write_checkpoint(&self, path: &Path) -> Result<()> {
        let mut blocks: Vec<&[f64]> = vec![self.rho.component(0)];
        for c in 0..self.u.components() {
            blocks.push(self.u.component(c));
        }
        blocks.push(self.p.component(0));
        io::write_blocks(path, self.grid(), &blocks, self.t)
    }

    pub fn read_checkpoint(path: &Path) -> Result<Self> {
        let (grid, blocks, t) = io::read_blocks(path)?;
        let expected = grid.dim() + 2;
        if blocks.len() != expected {
            return Err(Error::Checkpoint(format!(
                "flow state checkpoint needs {expected} blocks, found {}",
                blocks.len()
            )));
        }
        let rho = PeriodicField::from_data(grid, 1, blocks[0].clone())?;
        let mut u_data = Vec::with_capacity(grid.dim() * grid.points());
        for b in &blocks[1..1 + grid.dim()] {
            u_data.extend_from_slice(b);
        }
        let u = PeriodicField::from_data(grid, grid.dim(), u_data)?;
        let p = PeriodicField::from_data(grid, 1, blocks[grid.dim() + 1].clone())?;
        Ok(Self { rho, u, p, t })
    }
}

/// Uniformly sampled sequence of flow states.
#[derive(Debug, Clone)]
pub struct FlowTrajectory {
    states: Vec<FlowState>,
}

impl FlowTrajectory {
    pub fn from_states(states: Vec<FlowState>) -> Result<Self> {
        if states.len() < 2 {
            return Err(Error::TrajectoryTooShort(format!(
                "need at least 2 snapshots, got {}",
                states.len()
            )));
        }
        let dt = states[1].t - states[0].t;
        if !(dt > 0.0) {
            return Err(Error::TrajectoryTooShort("times must increase".into()));
        }
        for w in states.windows(2) {
            let step = w[1].t - w[0].t;
            if (step - dt).abs() > 1e-9 * dt.max(1.0) {
                return Err(Error::TrajectoryTooShort(format!(
                    "non-uniform snapshot spacing: {step} vs {dt}"
                )));
            }
        }
        Ok(Self { states })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn grid(&self) -> &Grid {
        self.states[0].grid()
    }

    pub fn time_step(&self) -> f64 {
        self.states[1].t - self.states[0].t
    }

    pub fn start_time(&self) -> f64 {
        self.states[0].t
    }

    pub fn end_time(&self) -> f64 {
        self.states[self.states.len() - 1].t
    }

    pub fn state(&self, i: usize) -> &FlowState {
        &self.states[i]
    }

    pub fn states(&self) -> &[FlowState] {
        &self.states
    }

    /// Index of the snapshot closest to `t`.
    pub fn nearest_index(&self, t: f64) -> usize {
        let dt = self.time_step();
        let raw = ((t - self.start_time()) / dt).round();
        (raw.max(0.0) as usize).min(self.len() - 1)
    }

    /// Map every state through `f`, keeping times.
    pub fn map_states<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&FlowState) -> FlowState,
    {
        Self::from_states(self.states.iter().map(f).collect())
    }
}

/// Separable structure hint: u(t_i, x) = amplitudes[i] * u_base(x) with a
/// static density. Consumers may exploit it for evaluation paths that are
/// algebraically identical to the general ones.
pub struct SeparableParts<'a> {
    pub rho: &'a PeriodicField,
    pub u_base: &'a PeriodicField,
    pub amplitudes: Vec<f64>,
}

/// Uniform-in-time snapshot provider. Trajectories implement it directly;
/// synthetic sources generate snapshots lazily so epsilon sweeps do not
/// materialize hundreds of fields.
pub trait SnapshotSource: Sync {
    fn grid(&self) -> Grid;
    fn len(&self) -> usize;
    fn time_step(&self) -> f64;
    fn start_time(&self) -> f64;
    fn density(&self, i: usize) -> PeriodicField;
    fn velocity(&self, i: usize) -> PeriodicField;

    fn time(&self, i: usize) -> f64 {
        self.start_time() + i as f64 * self.time_step()
    }
    fn end_time(&self) -> f64 {
        self.time(self.len() - 1)
    }
    /// Sources with exact separable structure may advertise it.
    fn separable(&self) -> Option<SeparableParts<'_>> {
        None
    }
}

impl SnapshotSource for FlowTrajectory {
    fn grid(&self) -> Grid {
        *FlowTrajectory::grid(self)
    }
    fn len(&self) -> usize {
        FlowTrajectory::len(self)
    }
    fn time_step(&self) -> f64 {
        FlowTrajectory::time_step(self)
    }
    fn start_time(&self) -> f64 {
        FlowTrajectory::start_time(self)
    }
    fn density(&self, i: usize) -> PeriodicField {
        self.states[i].rho.clone()
    }
    fn velocity(&self, i: usize) -> PeriodicField {
        self.states[i].u.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dummy_state(grid: Grid, t: f64) -> FlowState {
        FlowState::new(
            PeriodicField::constant(grid, 1, 1.0),
            PeriodicField::zeros(grid, 2),
            PeriodicField::zeros(grid, 1),
            t,
        )
    }

    #[test]
    fn uniform_spacing_enforced() {
        let grid = Grid::square(8).unwrap();
        let states = vec![dummy_state(grid, 0.0), dummy_state(grid, 0.1), dummy_state(grid, 0.25)];
        assert!(FlowTrajectory::from_states(states).is_err());
        let ok = vec![dummy_state(grid, 0.0), dummy_state(grid, 0.1), dummy_state(grid, 0.2)];
        let traj = FlowTrajectory::from_states(ok).unwrap();
        assert_eq!(traj.len(), 3);
        assert!((traj.time_step() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn state_checkpoint_roundtrip() {
        let grid = Grid::square(8).unwrap();
        let state = FlowState::new(
            PeriodicField::from_fn(grid, |x| 2.0 + 0.1 * x[0].sin()),
            PeriodicField::from_fn_vec(grid, 2, |x, c| if c == 0 { x[1].cos() } else { x[0].sin() }),
            PeriodicField::from_fn(grid, |x| x[0].cos() * x[1].cos()),
            0.75,
        );
        let dir = std::env::temp_dir().join("bolab_flow_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("state.bolab");
        state.write_checkpoint(&path).unwrap();
        let back = FlowState::read_checkpoint(&path).unwrap();
        assert_eq!(back.t, 0.75);
        assert_eq!(back.rho.data(), state.rho.data());
        assert_eq!(back.u.data(), state.u.data());
        assert_eq!(back.p.data(), state.p.data());
        std::fs::remove_file(&path).ok();
    }
}
