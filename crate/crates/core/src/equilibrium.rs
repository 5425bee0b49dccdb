//! Periodic equilibria as fixed points of the period map, found by forward
//! iteration until two consecutive periods differ by less than `tol` in
//! `L^2(0, 1)`.

use std::io::Write;

use crate::error::{invalid, Result};
use crate::integrator::{check_initial, write_states_csv, PeriodMesh, PeriodStepper};
use crate::mollifier::SeasonSchedule;
use crate::models::SeasonalModel;
use crate::quadrature::trapezoid;

/// Step size, stopping tolerance and period budget of the fixed-point
/// iteration. The default reproduces the reference setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub tol: f64,
    pub max_periods: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 0.1 / 365.0,
            tol: 1e-15,
            max_periods: 50_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= 0.5) {
            return Err(invalid(format!("dt must lie in (0, 0.5], got {}", self.dt)));
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(invalid(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_periods < 2 {
            return Err(invalid("max_periods must be at least 2"));
        }
        Ok(())
    }
}

/// One period of a (candidate) equilibrium sampled on the integration mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbit {
    schedule: SeasonSchedule,
    mesh: PeriodMesh,
    dim: usize,
    states: Vec<f64>,
    /// Periods integrated to produce this orbit.
    pub iterations: usize,
    pub converged: bool,
    /// `L^2(0, 1)` distance between the last two periods.
    pub residual: f64,
    pub residual_history: Vec<f64>,
}

impl PeriodicOrbit {
    /// Wraps node states (node-major) on `mesh`. The residual is set to the
    /// periodic mismatch `|u(1) - u(0)|`.
    pub fn from_states(
        schedule: SeasonSchedule,
        mesh: PeriodMesh,
        dim: usize,
        states: Vec<f64>,
    ) -> Result<Self> {
        if states.len() != mesh.nodes() * dim {
            return Err(invalid(format!(
                "expected {} state values, got {}",
                mesh.nodes() * dim,
                states.len()
            )));
        }
        let last = (mesh.nodes() - 1) * dim;
        let mismatch = (0..dim)
            .map(|i| (states[last + i] - states[i]).powi(2))
            .sum::<f64>()
            .sqrt();
        Ok(Self {
            schedule,
            mesh,
            dim,
            states,
            iterations: 0,
            converged: false,
            residual: mismatch,
            residual_history: Vec::new(),
        })
    }

    /// The trivial equilibrium `u = 0`.
    pub fn zero(schedule: SeasonSchedule, dt: f64, dim: usize) -> Result<Self> {
        let mesh = PeriodMesh::new(&schedule, dt)?;
        let states = vec![0.0; mesh.nodes() * dim];
        let mut orbit = Self::from_states(schedule, mesh, dim, states)?;
        orbit.converged = true;
        Ok(orbit)
    }

    /// Same mesh and schedule, different node states; metadata is reset.
    pub fn with_states(&self, states: Vec<f64>) -> Result<Self> {
        Self::from_states(self.schedule, self.mesh.clone(), self.dim, states)
    }

    pub fn schedule(&self) -> &SeasonSchedule {
        &self.schedule
    }

    pub fn mesh(&self) -> &PeriodMesh {
        &self.mesh
    }

    pub fn times(&self) -> &[f64] {
        self.mesh.times()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> usize {
        self.mesh.nodes()
    }

    pub fn state(&self, node: usize) -> &[f64] {
        &self.states[node * self.dim..(node + 1) * self.dim]
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn initial_state(&self) -> &[f64] {
        self.state(0)
    }

    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states.iter().skip(i).step_by(self.dim).copied().collect()
    }

    pub fn max_abs_component(&self, i: usize) -> f64 {
        self.component(i).iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Piecewise-linear interpolation of the node states at `t` in `[0, 1]`.
    pub fn value_at(&self, t: f64) -> Vec<f64> {
        let times = self.times();
        let k = times.partition_point(|&s| s <= t).clamp(1, times.len() - 1) - 1;
        let (t0, t1) = (times[k], times[k + 1]);
        let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        let (a, b) = (self.state(k), self.state(k + 1));
        a.iter().zip(b).map(|(x, y)| (1.0 - w) * x + w * y).collect()
    }

    /// `max_k |self(t_k) - other(t_k)|` over the nodes of `self`, with
    /// `other` interpolated when the meshes differ.
    pub fn max_distance(&self, other: &PeriodicOrbit) -> f64 {
        let mut worst = 0.0_f64;
        for (k, &t) in self.times().iter().enumerate() {
            let v = other.value_at(t);
            for (x, y) in self.state(k).iter().zip(&v) {
                worst = worst.max((x - y).abs());
            }
        }
        worst
    }

    /// CSV with columns `t,u_1..u_N`.
    pub fn write_csv<W: Write>(&self, mut w: W, comments: &[String]) -> std::io::Result<()> {
        write_states_csv(&mut w, comments, self.dim, self.mesh.times(), &self.states)
    }
}

/// End state of one period started at `u0`.
pub fn period_map<M: SeasonalModel + ?Sized>(
    model: &M,
    schedule: &SeasonSchedule,
    u0: &[f64],
    dt: f64,
) -> Result<Vec<f64>> {
    let tr = crate::integrator::integrate_period(model, schedule, u0, dt)?;
    Ok(tr.final_state().to_vec())
}

fn l2_distance(times: &[f64], dim: usize, a: &[f64], b: &[f64]) -> f64 {
    let sq: Vec<f64> = a
        .chunks_exact(dim)
        .zip(b.chunks_exact(dim))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum())
        .collect();
    trapezoid(times, &sq).sqrt()
}

/// Iterates the period map from `u0` until consecutive periods differ by
/// less than `config.tol` in `L^2(0, 1)` or `config.max_periods` periods have
/// been integrated. Non-convergence is reported through the returned orbit's
/// `converged` flag, not as an error.
pub fn find_equilibrium<M: SeasonalModel + ?Sized>(
    model: &M,
    schedule: &SeasonSchedule,
    u0: &[f64],
    config: &SolverConfig,
) -> Result<PeriodicOrbit> {
    config.validate()?;
    check_initial(model, u0)?;
    let n = model.dimension();
    let mut stepper = PeriodStepper::new(model, schedule, config.dt)?;
    let nodes = stepper.mesh().nodes();
    let mut previous = vec![0.0; nodes * n];
    let mut current = vec![0.0; nodes * n];
    stepper.run(u0, &mut previous, 0.0)?;
    let mut history = Vec::new();
    let mut periods = 1;
    let mut residual = f64::INFINITY;
    while periods < config.max_periods {
        let start = previous[(nodes - 1) * n..].to_vec();
        stepper.run(&start, &mut current, periods as f64)?;
        periods += 1;
        residual = l2_distance(stepper.mesh().times(), n, &current, &previous);
        history.push(residual);
        std::mem::swap(&mut previous, &mut current);
        if residual < config.tol {
            break;
        }
    }
    let mesh = stepper.mesh().clone();
    Ok(PeriodicOrbit {
        schedule: *schedule,
        mesh,
        dim: n,
        states: previous,
        iterations: periods,
        converged: residual < config.tol,
        residual,
        residual_history: history,
    })
}

/// Trapezoid approximation of `(int_0^1 u_i(t)^2 dt)^{1/2}`.
pub fn l2_norm_component(orbit: &PeriodicOrbit, component: usize) -> Result<f64> {
    if component >= orbit.dim() {
        return Err(invalid(format!(
            "component {component} out of range for a {}-dimensional orbit",
            orbit.dim()
        )));
    }
    let sq: Vec<f64> = orbit.component(component).iter().map(|v| v * v).collect();
    Ok(trapezoid(orbit.times(), &sq).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::LotkaVolterraMalthus;

    #[test]
    fn default_config_is_reference_setting() {
        let c = SolverConfig::default();
        assert_eq!(c.dt, 0.1 / 365.0);
        assert_eq!(c.tol, 1e-15);
        assert_eq!(c.max_periods, 50_000);
    }

    #[test]
    fn norms_of_constant_orbits() {
        let s = SeasonSchedule::sharp(0.3).unwrap();
        let zero = PeriodicOrbit::zero(s, 0.01, 2).unwrap();
        assert_eq!(l2_norm_component(&zero, 0).unwrap(), 0.0);
        let c = zero.with_states(vec![-0.75; zero.nodes() * 2]).unwrap();
        assert!((l2_norm_component(&c, 1).unwrap() - 0.75).abs() < 1e-12);
        assert!(l2_norm_component(&c, 2).is_err());
    }

    #[test]
    fn period_map_fixes_origin() {
        let m = LotkaVolterraMalthus::reference();
        let s = SeasonSchedule::sharp(0.7).unwrap();
        assert_eq!(period_map(&m, &s, &[0.0, 0.0], 1e-3).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn unconverged_run_is_flagged() {
        let m = LotkaVolterraMalthus::reference();
        let s = SeasonSchedule::sharp(0.45).unwrap();
        let cfg = SolverConfig {
            dt: 1e-3,
            tol: 1e-15,
            max_periods: 3,
        };
        let orbit = find_equilibrium(&m, &s, &[1.0, 0.25], &cfg).unwrap();
        assert!(!orbit.converged);
        assert_eq!(orbit.iterations, 3);
        assert_eq!(orbit.residual_history.len(), 2);
    }

    #[test]
    fn invalid_config_rejected() {
        let m = LotkaVolterraMalthus::reference();
        let s = SeasonSchedule::sharp(0.45).unwrap();
        let cfg = SolverConfig {
            tol: 0.0,
            ..SolverConfig::default()
        };
        assert!(find_equilibrium(&m, &s, &[1.0, 0.25], &cfg).is_err());
    }
}
