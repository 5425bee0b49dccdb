//! Fixed-step classical RK4 over one or many periods, plus the variational
//! (fundamental-matrix) flow along a stored orbit.
//!
//! For sharp transitions the period mesh is split at `tau`: the growth season
//! `[0, tau]` and the decline season `[tau, 1]` are each covered by equal
//! steps as close to `dt` as possible, so no step straddles the switch. For
//! mollified transitions the mesh is uniform with `round(1 / dt)` steps.

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::equilibrium::PeriodicOrbit;
use crate::error::{invalid, Error, Result};
use crate::mollifier::SeasonSchedule;
use crate::models::SeasonalModel;

/// Indicator weights `(chi_g, chi_d)`.
pub type Weights = [f64; 2];

/// Time nodes of one period and the indicator weights each RK4 step sees
/// at its left end, midpoint and right end.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodMesh {
    times: Vec<f64>,
    stage_weights: Vec<[Weights; 3]>,
    switch_node: Option<usize>,
}

fn steps_for(length: f64, dt: f64) -> usize {
    ((length / dt).round() as usize).max(1)
}

impl PeriodMesh {
    pub fn new(schedule: &SeasonSchedule, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt <= 0.5) || !dt.is_finite() {
            return Err(invalid(format!("time step must lie in (0, 0.5], got {dt}")));
        }
        if schedule.is_sharp() {
            let tau = schedule.tau();
            let n_growth = steps_for(tau, dt);
            let n_decline = steps_for(1.0 - tau, dt);
            let mut times = Vec::with_capacity(n_growth + n_decline + 1);
            let hg = tau / n_growth as f64;
            let hd = (1.0 - tau) / n_decline as f64;
            times.extend((0..n_growth).map(|k| k as f64 * hg));
            times.push(tau);
            times.extend((1..n_decline).map(|k| tau + k as f64 * hd));
            times.push(1.0);
            let mut stage_weights = vec![[[1.0, 0.0]; 3]; n_growth];
            stage_weights.extend(std::iter::repeat_n([[0.0, 1.0]; 3], n_decline));
            Ok(Self {
                times,
                stage_weights,
                switch_node: Some(n_growth),
            })
        } else {
            let n = steps_for(1.0, dt);
            let h = 1.0 / n as f64;
            let mut times: Vec<f64> = (0..n).map(|k| k as f64 * h).collect();
            times.push(1.0);
            let stage_weights = (0..n)
                .map(|k| {
                    let (t0, t1) = (times[k], times[k + 1]);
                    let w = |t: f64| {
                        let (g, d) = schedule.indicators(t);
                        [g, d]
                    };
                    [w(t0), w(0.5 * (t0 + t1)), w(t1)]
                })
                .collect();
            Ok(Self {
                times,
                stage_weights,
                switch_node: None,
            })
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn nodes(&self) -> usize {
        self.times.len()
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    /// Node sitting exactly on `tau` (sharp meshes only).
    pub fn switch_node(&self) -> Option<usize> {
        self.switch_node
    }

    pub fn step_width(&self, k: usize) -> f64 {
        self.times[k + 1] - self.times[k]
    }

    /// Weights at the left end, midpoint and right end of step `k`.
    pub fn stage_weights(&self, k: usize) -> &[Weights; 3] {
        &self.stage_weights[k]
    }
}

/// Node samples of a solution; states are stored node-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dim: usize,
    times: Vec<f64>,
    states: Vec<f64>,
}

impl Trajectory {
    pub fn new(dim: usize, times: Vec<f64>, states: Vec<f64>) -> Self {
        assert_eq!(times.len() * dim, states.len());
        Self { dim, times, states }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, node: usize) -> &[f64] {
        &self.states[node * self.dim..(node + 1) * self.dim]
    }

    pub fn final_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states.iter().skip(i).step_by(self.dim).copied().collect()
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }

    /// CSV with columns `t,u_1..u_N`; `comments` are emitted as `# ` lines.
    pub fn write_csv<W: Write>(&self, mut w: W, comments: &[String]) -> std::io::Result<()> {
        write_states_csv(&mut w, comments, self.dim, &self.times, &self.states)
    }
}

pub(crate) fn write_states_csv<W: Write>(
    w: &mut W,
    comments: &[String],
    dim: usize,
    times: &[f64],
    states: &[f64],
) -> std::io::Result<()> {
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    write!(w, "t")?;
    for i in 1..=dim {
        write!(w, ",u_{i}")?;
    }
    writeln!(w)?;
    for (k, t) in times.iter().enumerate() {
        write!(w, "{t}")?;
        for v in &states[k * dim..(k + 1) * dim] {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Reusable RK4 stepper for one schedule; owns its scratch buffers.
pub(crate) struct PeriodStepper<'a, M: SeasonalModel + ?Sized> {
    model: &'a M,
    mesh: PeriodMesh,
    scratch: Scratch,
}

struct Scratch {
    k: [Vec<f64>; 4],
    stage: Vec<f64>,
    fg: Vec<f64>,
    fd: Vec<f64>,
}

fn blended_rhs<M: SeasonalModel + ?Sized>(
    model: &M,
    w: &Weights,
    u: &[f64],
    fg: &mut [f64],
    fd: &mut [f64],
    out: &mut [f64],
) {
    match (w[0] != 0.0, w[1] != 0.0) {
        (true, false) => {
            model.growth(u, out);
            if w[0] != 1.0 {
                out.iter_mut().for_each(|v| *v *= w[0]);
            }
        }
        (false, true) => {
            model.decline(u, out);
            if w[1] != 1.0 {
                out.iter_mut().for_each(|v| *v *= w[1]);
            }
        }
        (false, false) => out.iter_mut().for_each(|v| *v = 0.0),
        (true, true) => {
            model.growth(u, fg);
            model.decline(u, fd);
            for ((o, a), b) in out.iter_mut().zip(fg.iter()).zip(fd.iter()) {
                *o = a * w[0] + b * w[1];
            }
        }
    }
}

impl<'a, M: SeasonalModel + ?Sized> PeriodStepper<'a, M> {
    pub fn new(model: &'a M, schedule: &SeasonSchedule, dt: f64) -> Result<Self> {
        Ok(Self::with_mesh(model, PeriodMesh::new(schedule, dt)?))
    }

    pub fn with_mesh(model: &'a M, mesh: PeriodMesh) -> Self {
        let n = model.dimension();
        Self {
            model,
            mesh,
            scratch: Scratch {
                k: [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]],
                stage: vec![0.0; n],
                fg: vec![0.0; n],
                fd: vec![0.0; n],
            },
        }
    }

    pub fn mesh(&self) -> &PeriodMesh {
        &self.mesh
    }

    /// Integrates one period from `u0`, writing every node state into
    /// `states` (length `nodes * dim`). `time_offset` only labels errors.
    pub fn run(&mut self, u0: &[f64], states: &mut [f64], time_offset: f64) -> Result<()> {
        let n = self.model.dimension();
        debug_assert_eq!(states.len(), self.mesh.nodes() * n);
        states[..n].copy_from_slice(u0);
        let Scratch { k, stage, fg, fd } = &mut self.scratch;
        let [k1, k2, k3, k4] = k;
        for step in 0..self.mesh.steps() {
            let h = self.mesh.step_width(step);
            let w = self.mesh.stage_weights(step);
            let (done, rest) = states.split_at_mut((step + 1) * n);
            let u = &done[step * n..];
            blended_rhs(self.model, &w[0], u, fg, fd, k1);
            for i in 0..n {
                stage[i] = u[i] + 0.5 * h * k1[i];
            }
            blended_rhs(self.model, &w[1], stage, fg, fd, k2);
            for i in 0..n {
                stage[i] = u[i] + 0.5 * h * k2[i];
            }
            blended_rhs(self.model, &w[1], stage, fg, fd, k3);
            for i in 0..n {
                stage[i] = u[i] + h * k3[i];
            }
            blended_rhs(self.model, &w[2], stage, fg, fd, k4);
            let next = &mut rest[..n];
            let mut finite = true;
            for i in 0..n {
                next[i] = u[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                // flush subnormals
                if next[i].abs() < f64::MIN_POSITIVE {
                    next[i] = 0.0;
                }
                finite &= next[i].is_finite();
            }
            if !finite {
                return Err(Error::NonFinite {
                    time: time_offset + self.mesh.times[step + 1],
                });
            }
        }
        Ok(())
    }
}

pub(crate) fn check_initial<M: SeasonalModel + ?Sized>(model: &M, u0: &[f64]) -> Result<()> {
    if u0.len() != model.dimension() {
        return Err(invalid(format!(
            "initial state has {} components, model {} expects {}",
            u0.len(),
            model.label(),
            model.dimension()
        )));
    }
    if u0.iter().any(|v| !v.is_finite()) {
        return Err(invalid("initial state must be finite"));
    }
    Ok(())
}

/// One period `[0, 1]` from `u0`; the final node is the period-map image.
pub fn integrate_period<M: SeasonalModel + ?Sized>(
    model: &M,
    schedule: &SeasonSchedule,
    u0: &[f64],
    dt: f64,
) -> Result<Trajectory> {
    check_initial(model, u0)?;
    let mut stepper = PeriodStepper::new(model, schedule, dt)?;
    let n = model.dimension();
    let mut states = vec![0.0; stepper.mesh().nodes() * n];
    stepper.run(u0, &mut states, 0.0)?;
    Ok(Trajectory::new(n, stepper.mesh().times().to_vec(), states))
}

/// `n_periods` successive periods, each starting from the previous end state.
pub fn integrate_horizon<M: SeasonalModel + ?Sized>(
    model: &M,
    schedule: &SeasonSchedule,
    u0: &[f64],
    n_periods: usize,
    dt: f64,
) -> Result<Trajectory> {
    check_initial(model, u0)?;
    if n_periods == 0 {
        return Err(invalid("number of periods must be positive"));
    }
    let mut stepper = PeriodStepper::new(model, schedule, dt)?;
    let n = model.dimension();
    let nodes = stepper.mesh().nodes();
    let mut period = vec![0.0; nodes * n];
    let mut times = Vec::with_capacity(n_periods * (nodes - 1) + 1);
    let mut states = Vec::with_capacity((n_periods * (nodes - 1) + 1) * n);
    times.push(0.0);
    states.extend_from_slice(u0);
    let mut start = u0.to_vec();
    for p in 0..n_periods {
        let offset = p as f64;
        stepper.run(&start, &mut period, offset)?;
        times.extend(stepper.mesh().times()[1..].iter().map(|t| t + offset));
        states.extend_from_slice(&period[n..]);
        start.copy_from_slice(&period[(nodes - 1) * n..]);
    }
    Ok(Trajectory::new(n, times, states))
}

/// Fundamental matrices `G(t, 0)` at the mesh nodes of a period.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalMatrixPath {
    pub times: Vec<f64>,
    pub matrices: Vec<DMatrix<f64>>,
}

impl FundamentalMatrixPath {
    /// `G(1, 0)`.
    pub fn monodromy(&self) -> &DMatrix<f64> {
        self.matrices.last().expect("fundamental path is never empty")
    }

    /// `G(1, t_k) = G(1, 0) G(t_k, 0)^{-1}`.
    pub fn to_end(&self, k: usize) -> Option<DMatrix<f64>> {
        self.matrices[k]
            .clone()
            .try_inverse()
            .map(|inv| self.monodromy() * inv)
    }
}

/// Linearization `H[tau, u](t)` at the left end, midpoint and right end of
/// each step along an orbit. The midpoint state is the cubic Hermite
/// interpolant built from node states and node derivatives.
pub(crate) struct OrbitLinearization<'a, M: SeasonalModel + ?Sized> {
    model: &'a M,
    orbit: &'a PeriodicOrbit,
}

impl<'a, M: SeasonalModel + ?Sized> OrbitLinearization<'a, M> {
    pub fn new(model: &'a M, orbit: &'a PeriodicOrbit) -> Result<Self> {
        if orbit.dim() != model.dimension() {
            return Err(invalid(format!(
                "orbit dimension {} does not match model dimension {}",
                orbit.dim(),
                model.dimension()
            )));
        }
        Ok(Self { model, orbit })
    }

    fn h_at(&self, u: &[f64], w: &Weights) -> DMatrix<f64> {
        let n = self.model.dimension();
        let mut h = DMatrix::zeros(n, n);
        if w[0] != 0.0 {
            h += self.model.growth_jacobian(u) * w[0];
        }
        if w[1] != 0.0 {
            h += self.model.decline_jacobian(u) * w[1];
        }
        h
    }

    /// `[H(t_k^+), H(t_k + h/2), H(t_{k+1}^-)]`.
    pub fn step_matrices(&self, k: usize) -> [DMatrix<f64>; 3] {
        let n = self.model.dimension();
        let mesh = self.orbit.mesh();
        let w = mesh.stage_weights(k);
        let h = mesh.step_width(k);
        let (u0, u1) = (self.orbit.state(k), self.orbit.state(k + 1));
        let mut fg = vec![0.0; n];
        let mut fd = vec![0.0; n];
        let mut f0 = vec![0.0; n];
        let mut f1 = vec![0.0; n];
        blended_rhs(self.model, &w[0], u0, &mut fg, &mut fd, &mut f0);
        blended_rhs(self.model, &w[2], u1, &mut fg, &mut fd, &mut f1);
        let mid: Vec<f64> = (0..n)
            .map(|i| 0.5 * (u0[i] + u1[i]) + h * (f0[i] - f1[i]) / 8.0)
            .collect();
        [self.h_at(u0, &w[0]), self.h_at(&mid, &w[1]), self.h_at(u1, &w[2])]
    }
}

/// Solves `Phi' = H[tau, u](t) Phi`, `Phi(0) = I` along `orbit`.
pub fn integrate_variational<M: SeasonalModel + ?Sized>(
    model: &M,
    orbit: &PeriodicOrbit,
) -> Result<FundamentalMatrixPath> {
    let lin = OrbitLinearization::new(model, orbit)?;
    let n = model.dimension();
    let mesh = orbit.mesh();
    let mut matrices = Vec::with_capacity(mesh.nodes());
    let mut g = DMatrix::<f64>::identity(n, n);
    matrices.push(g.clone());
    for k in 0..mesh.steps() {
        let h = mesh.step_width(k);
        let [hl, hm, hr] = lin.step_matrices(k);
        let k1 = &hl * &g;
        let k2 = &hm * (&g + &k1 * (0.5 * h));
        let k3 = &hm * (&g + &k2 * (0.5 * h));
        let k4 = &hr * (&g + &k3 * h);
        g += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        let t = mesh.times()[k + 1];
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { time: t });
        }
        let det = g.determinant();
        if det.abs() < 1e-12 {
            return Err(Error::SingularFundamental { time: t, det });
        }
        matrices.push(g.clone());
    }
    Ok(FundamentalMatrixPath {
        times: mesh.times().to_vec(),
        matrices,
    })
}

/// Solves the adjoint equation `Psi' = -H(t)^T Psi` backwards from
/// `Psi(1) = terminal`, returning `Psi` at every mesh node (so
/// `Psi(t) = G(1, t)^T terminal`).
pub fn integrate_adjoint<M: SeasonalModel + ?Sized>(
    model: &M,
    orbit: &PeriodicOrbit,
    terminal: &DVector<f64>,
) -> Result<Vec<DVector<f64>>> {
    let lin = OrbitLinearization::new(model, orbit)?;
    if terminal.len() != model.dimension() {
        return Err(invalid("terminal vector has the wrong dimension"));
    }
    let mesh = orbit.mesh();
    let mut values = vec![DVector::zeros(model.dimension()); mesh.nodes()];
    let mut psi = terminal.clone();
    values[mesh.steps()] = psi.clone();
    for k in (0..mesh.steps()).rev() {
        let h = mesh.step_width(k);
        let [hl, hm, hr] = lin.step_matrices(k);
        let (ll, lm, lr) = (-hl.transpose(), -hm.transpose(), -hr.transpose());
        let k1 = &lr * &psi;
        let k2 = &lm * (&psi - &k1 * (0.5 * h));
        let k3 = &lm * (&psi - &k2 * (0.5 * h));
        let k4 = &ll * (&psi - &k3 * h);
        psi -= (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if psi.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                time: mesh.times()[k],
            });
        }
        values[k] = psi.clone();
    }
    Ok(values)
}
