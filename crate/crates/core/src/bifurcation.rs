//! Bifurcation diagrams over the season length and the critical values of
//! the Lotka-Volterra/Malthus family.
//!
//! The primary critical values solve `r_eps(tau) = mu_i / (alpha_i + mu_i) r_eps(1)`.
//! The secondary value, where the second species invades the single-species
//! branch, solves
//!
//! ```text
//! r_eps(tau) = (beta21 U(tau) + mu2 r_eps(1)) / (alpha2 + mu2),   U = int u1 chi_g,
//! ```
//!
//! located either from `U` sampled on a sweep or, for sharp transitions, in
//! closed form.

use std::fmt;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{find_equilibrium, l2_norm_component, PeriodicOrbit, SolverConfig};
use crate::error::{invalid, Error, Result};
use crate::integrator::{integrate_variational, FundamentalMatrixPath};
use crate::linearization::{build_a, dual_solution, shifted_orbit, MonodromyReport};
use crate::mollifier::{r_eps, KernelSpec, SeasonSchedule};
use crate::models::{LVMalthusParams, SeasonalModel};
use crate::quadrature::trapezoid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    Primary,
    Secondary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalMethod {
    ClosedForm,
    RootFind,
    MeshScan,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalParameter {
    pub kind: CriticalKind,
    pub tau_value: f64,
    pub method: CriticalMethod,
    /// Mismatch of the defining equation at `tau_value`.
    pub residual: f64,
}

impl fmt::Display for CriticalParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            CriticalKind::Primary => "primary",
            CriticalKind::Secondary => "secondary",
        };
        let method = match self.method {
            CriticalMethod::ClosedForm => "closed_form",
            CriticalMethod::RootFind => "root_find",
            CriticalMethod::MeshScan => "mesh_scan",
        };
        write!(
            f,
            "kind = {kind}\nvalue = {}\nmethod = {method}\nresidual = {:e}",
            self.tau_value, self.residual
        )
    }
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Per-component critical values of the trivial equilibrium; the primary
/// critical value is the smaller of the two.
pub fn primary_tau(params: &LVMalthusParams, kernel: &KernelSpec) -> Result<[CriticalParameter; 2]> {
    let (a, m) = (params.alpha, params.mu);
    if (a[0] / m[0] - a[1] / m[1]).abs() <= 1e-12 * (a[0] / m[0]).abs() {
        return Err(invalid(
            "alpha1/mu1 = alpha2/mu2 gives a two-dimensional kernel; critical value is not simple",
        ));
    }
    let r_one = r_eps(kernel, 1.0);
    let solve = |i: usize| -> Result<CriticalParameter> {
        let ratio = m[i] / (a[i] + m[i]);
        if kernel.is_sharp() {
            return Ok(CriticalParameter {
                kind: CriticalKind::Primary,
                tau_value: ratio,
                method: CriticalMethod::ClosedForm,
                residual: 0.0,
            });
        }
        let target = ratio * r_one;
        let g = |tau: f64| r_eps(kernel, tau) - target;
        let half = 0.5 * kernel.epsilon();
        let (lo, hi) = (half, 1.0 - half);
        if g(lo) > 0.0 || g(hi) < 0.0 {
            return Err(invalid(format!(
                "no admissible root of r_eps(tau) = {target} for epsilon = {}",
                kernel.epsilon()
            )));
        }
        let tau = bisect(g, lo, hi);
        Ok(CriticalParameter {
            kind: CriticalKind::Primary,
            tau_value: tau,
            method: CriticalMethod::RootFind,
            residual: g(tau).abs(),
        })
    };
    Ok([solve(0)?, solve(1)?])
}

/// The smaller of the two roots of [`primary_tau`].
pub fn primary_critical(params: &LVMalthusParams, kernel: &KernelSpec) -> Result<CriticalParameter> {
    let [a, b] = primary_tau(params, kernel)?;
    Ok(if a.tau_value <= b.tau_value { a } else { b })
}

/// `tau_n = n / (count - 1)` for the interior indices `n = 1..count - 2`.
pub fn default_tau_mesh(count: usize) -> Vec<f64> {
    let denom = (count - 1) as f64;
    (1..count - 1).map(|n| n as f64 / denom).collect()
}

/// Growth-season integral `int_0^1 u_1(t) chi_g(t) dt`, i.e. `int_0^tau u_1`
/// for sharp transitions.
pub fn growth_integral_u(orbit: &PeriodicOrbit) -> f64 {
    let times = orbit.times();
    let u1 = orbit.component(0);
    match orbit.mesh().switch_node() {
        Some(k) => trapezoid(&times[..=k], &u1[..=k]),
        None => {
            let schedule = orbit.schedule();
            let weighted: Vec<f64> = times
                .iter()
                .zip(&u1)
                .map(|(&t, &u)| u * schedule.indicators(t).0)
                .collect();
            trapezoid(times, &weighted)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramRow {
    pub tau: f64,
    pub norms: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    pub growth_integral: f64,
    /// Set when the row could not be computed; the numeric fields are NaN.
    pub error: Option<String>,
}

impl DiagramRow {
    fn failed(tau: f64, dim: usize, err: &Error) -> Self {
        Self {
            tau,
            norms: vec![f64::NAN; dim],
            iterations: 0,
            converged: false,
            residual: f64::NAN,
            growth_integral: f64::NAN,
            error: Some(err.to_string()),
        }
    }
}

/// Equilibrium, norms and growth integral at one mesh point.
pub fn diagram_row<M: SeasonalModel + ?Sized>(
    model: &M,
    kernel: &KernelSpec,
    tau: f64,
    u0: &[f64],
    config: &SolverConfig,
) -> DiagramRow {
    let dim = model.dimension();
    let run = || -> Result<DiagramRow> {
        let schedule = SeasonSchedule::new(tau, *kernel)?;
        let orbit = find_equilibrium(model, &schedule, u0, config)?;
        let norms = (0..dim)
            .map(|i| l2_norm_component(&orbit, i))
            .collect::<Result<Vec<_>>>()?;
        Ok(DiagramRow {
            tau,
            norms,
            iterations: orbit.iterations,
            converged: orbit.converged,
            residual: orbit.residual,
            growth_integral: growth_integral_u(&orbit),
            error: None,
        })
    };
    run().unwrap_or_else(|e| DiagramRow::failed(tau, dim, &e))
}

fn check_mesh(tau_mesh: &[f64]) -> Result<()> {
    if tau_mesh.is_empty() {
        return Err(invalid("tau mesh is empty"));
    }
    if tau_mesh.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("tau mesh must be strictly increasing"));
    }
    Ok(())
}

/// Sweeps `tau_mesh` on `workers` threads (0 selects rayon's default).
/// Rows come back in mesh order; failures are recorded per row.
pub fn sweep_diagram<M: SeasonalModel + ?Sized>(
    model: &M,
    kernel: &KernelSpec,
    tau_mesh: &[f64],
    u0: &[f64],
    config: &SolverConfig,
    workers: usize,
) -> Result<Vec<DiagramRow>> {
    sweep_diagram_with(model, kernel, tau_mesh, u0, config, workers, |_, _| {})
}

/// As [`sweep_diagram`], calling `on_row(index, row)` as each row finishes.
pub fn sweep_diagram_with<M, F>(
    model: &M,
    kernel: &KernelSpec,
    tau_mesh: &[f64],
    u0: &[f64],
    config: &SolverConfig,
    workers: usize,
    on_row: F,
) -> Result<Vec<DiagramRow>>
where
    M: SeasonalModel + ?Sized,
    F: Fn(usize, &DiagramRow) + Sync,
{
    check_mesh(tau_mesh)?;
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| invalid(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| {
        tau_mesh
            .par_iter()
            .enumerate()
            .map(|(k, &tau)| {
                let row = diagram_row(model, kernel, tau, u0, config);
                on_row(k, &row);
                row
            })
            .collect()
    }))
}

/// CSV with columns `tau,norm_1..norm_N,iterations,converged`.
pub fn write_diagram_csv<W: Write>(
    mut w: W,
    rows: &[DiagramRow],
    comments: &[String],
) -> std::io::Result<()> {
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    let dim = rows.first().map_or(0, |r| r.norms.len());
    write!(w, "tau")?;
    for i in 1..=dim {
        write!(w, ",norm_{i}")?;
    }
    writeln!(w, ",iterations,converged")?;
    for r in rows {
        write!(w, "{}", r.tau)?;
        for n in &r.norms {
            write!(w, ",{n}")?;
        }
        writeln!(w, ",{},{}", r.iterations, r.converged)?;
    }
    Ok(())
}

fn secondary_residual(params: &LVMalthusParams, kernel: &KernelSpec, tau: f64, u: f64) -> f64 {
    let (a, b, m) = (params.alpha, params.beta, params.mu);
    (b[1][0] * u + m[1] * r_eps(kernel, 1.0)) / (a[1] + m[1]) - r_eps(kernel, tau)
}

/// Mesh point minimizing the secondary residual over `rows`. Fails with
/// [`Error::NoSecondaryCrossing`] when the best residual exceeds `bound`.
pub fn secondary_tau_scan(
    params: &LVMalthusParams,
    kernel: &KernelSpec,
    rows: &[DiagramRow],
    bound: f64,
) -> Result<CriticalParameter> {
    let best = rows
        .iter()
        .filter(|r| r.error.is_none() && r.growth_integral.is_finite())
        .map(|r| (r.tau, secondary_residual(params, kernel, r.tau, r.growth_integral).abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| invalid("no usable rows for the secondary scan"))?;
    if best.1 > bound {
        return Err(Error::NoSecondaryCrossing {
            tau: best.0,
            best_residual: best.1,
        });
    }
    Ok(CriticalParameter {
        kind: CriticalKind::Secondary,
        tau_value: best.0,
        method: CriticalMethod::MeshScan,
        residual: best.1,
    })
}

/// `(1 + (a2 b11 - a1 b21) / (m2 b11 - m1 b21))^{-1}` for sharp transitions.
pub fn secondary_tau_analytic(params: &LVMalthusParams) -> Result<CriticalParameter> {
    let (a, b, m) = (params.alpha, params.beta, params.mu);
    let denom = m[1] * b[0][0] - m[0] * b[1][0];
    if denom.abs() < 1e-14 {
        return Err(invalid("mu2*beta11 = mu1*beta21: secondary critical value undefined"));
    }
    let tau = 1.0 / (1.0 + (a[1] * b[0][0] - a[0] * b[1][0]) / denom);
    if !(tau > 0.0 && tau < 1.0) {
        return Err(invalid(format!("secondary critical value {tau} outside (0, 1)")));
    }
    let u = (a[0] * tau - m[0] * (1.0 - tau)) / b[0][0];
    Ok(CriticalParameter {
        kind: CriticalKind::Secondary,
        tau_value: tau,
        method: CriticalMethod::ClosedForm,
        residual: secondary_residual(params, &KernelSpec::sharp(), tau, u).abs(),
    })
}

/// Bisection of the secondary residual along the single-species branch,
/// with `U` from equilibria started at `(K_1 / 2, 0)`. Works for any kernel.
pub fn secondary_tau_root_find(
    params: &LVMalthusParams,
    kernel: &KernelSpec,
    config: &SolverConfig,
    tau_tol: f64,
) -> Result<CriticalParameter> {
    let [first, second] = primary_tau(params, kernel)?;
    if first.tau_value >= second.tau_value {
        return Err(Error::Precondition(
            "the secondary criterion assumes species 1 persists first".into(),
        ));
    }
    let model = crate::models::LotkaVolterraMalthus::new(*params);
    let u0 = [0.5 * params.carrying_capacity()[0], 0.0];
    let g = |tau: f64| -> Result<f64> {
        let schedule = SeasonSchedule::new(tau, *kernel)?;
        let orbit = find_equilibrium(&model, &schedule, &u0, config)?;
        Ok(secondary_residual(params, kernel, tau, growth_integral_u(&orbit)))
    };
    let half = 0.5 * kernel.epsilon();
    let mut lo = first.tau_value + 0.01;
    let mut hi = 1.0 - half - 1e-3;
    let (g_lo, g_hi) = (g(lo)?, g(hi)?);
    if (g_lo < 0.0) == (g_hi < 0.0) {
        return Err(Error::NoSecondaryCrossing {
            tau: hi,
            best_residual: g_lo.abs().min(g_hi.abs()),
        });
    }
    while hi - lo > tau_tol {
        let mid = 0.5 * (lo + hi);
        if (g(mid)? < 0.0) == (g_lo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = 0.5 * (lo + hi);
    Ok(CriticalParameter {
        kind: CriticalKind::Secondary,
        tau_value: tau,
        method: CriticalMethod::RootFind,
        residual: g(tau)?.abs(),
    })
}

/// Value of the condition-(d) integral. It rests on a finite-difference
/// estimate of the branch derivative and is evidence, not a proof.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionD {
    pub value: f64,
    pub numerical_only: bool,
}

/// `int_0^1 Phi_R(t) . B(t) Phi_0(t) dt + Phi_R(t_s) . B_s Phi_0(t_s)` by the
/// trapezoid rule on every `stride`-th node. `dirac` adds a point mass
/// `(node, B_s)`; the node also splits the quadrature into two pieces.
pub fn condition_d_integral(
    times: &[f64],
    direct: &[DVector<f64>],
    dual: &[DVector<f64>],
    smooth: &[DMatrix<f64>],
    dirac: Option<(usize, &DMatrix<f64>)>,
    stride: usize,
) -> Result<f64> {
    let n = times.len();
    if direct.len() != n || dual.len() != n || smooth.len() != n {
        return Err(invalid("condition-(d) samples must match the mesh"));
    }
    if stride == 0 || n < 2 {
        return Err(invalid("stride must be positive and the mesh non-trivial"));
    }
    let integrand: Vec<f64> = (0..n).map(|k| dual[k].dot(&(&smooth[k] * &direct[k]))).collect();
    let mut pieces = vec![0];
    if let Some((k, _)) = dirac {
        if k > 0 && k < n - 1 {
            pieces.push(k);
        }
    }
    pieces.push(n - 1);
    let mut total = 0.0;
    for w in pieces.windows(2) {
        let mut idx: Vec<usize> = (w[0]..w[1]).step_by(stride).collect();
        idx.push(w[1]);
        let t: Vec<f64> = idx.iter().map(|&k| times[k]).collect();
        let v: Vec<f64> = idx.iter().map(|&k| integrand[k]).collect();
        total += trapezoid(&t, &v);
    }
    if let Some((k, b)) = dirac {
        total += dual[k].dot(&(b * &direct[k]));
    }
    Ok(total)
}

/// Condition (d) at the critical orbit, pairing the direct and dual kernel
/// solutions with `B = d/dtau H[tau, u(tau)]`. The branch derivative
/// `du/dtau` is the central difference of the equilibria `below` and `above`
/// (at `tau -/+ delta`), interpolated onto the critical mesh.
#[allow(clippy::too_many_arguments)]
pub fn secondary_condition_d_from_neighbors<M: SeasonalModel + ?Sized>(
    model: &M,
    orbit: &PeriodicOrbit,
    report: &MonodromyReport,
    below: &PeriodicOrbit,
    above: &PeriodicOrbit,
    delta: f64,
    stride: usize,
) -> Result<ConditionD> {
    let (phi0, phi_r) = match (&report.phi0, &report.phi_r) {
        (Some(a), Some(b)) if report.unit_multiplier_count == 1 => (a, b),
        _ => {
            return Err(Error::Precondition(
                "condition (d) needs exactly one unit multiplier".into(),
            ))
        }
    };
    if !(delta > 0.0) {
        return Err(Error::BranchDerivative("step must be positive".into()));
    }
    for nb in [below, above] {
        if !nb.converged {
            return Err(Error::BranchDerivative(format!(
                "neighbor equilibrium at tau = {} did not converge",
                nb.schedule().tau()
            )));
        }
    }
    let schedule = orbit.schedule();
    let n = orbit.dim();
    let times = orbit.times();
    let path = integrate_variational(model, orbit)?;
    let direct: Vec<DVector<f64>> = path.matrices.iter().map(|g| g * phi0).collect();
    let dual = dual_solution(model, orbit, phi_r)?.values;

    let mut shifted = vec![0.0; n];
    let smooth: Vec<DMatrix<f64>> = times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let lo = below.value_at(t);
            let hi = above.value_at(t);
            let u = orbit.state(k);
            let du: Vec<f64> = hi.iter().zip(&lo).map(|(h, l)| (h - l) / (2.0 * delta)).collect();
            let scale = du.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let (g, d) = schedule.indicators(t);
            let mut b = DMatrix::zeros(n, n);
            if scale > 0.0 {
                let h = 1e-6 / scale;
                for i in 0..n {
                    shifted[i] = u[i] + h * du[i];
                }
                let plus = model.growth_jacobian(&shifted) * g + model.decline_jacobian(&shifted) * d;
                for i in 0..n {
                    shifted[i] = u[i] - h * du[i];
                }
                let minus = model.growth_jacobian(&shifted) * g + model.decline_jacobian(&shifted) * d;
                b = (plus - minus) / (2.0 * h);
            }
            if !schedule.is_sharp() {
                let s = t - schedule.tau();
                if s.abs() < 0.5 * schedule.epsilon() {
                    b += build_a(model, u) * schedule.kernel().eval(s)?;
                }
            }
            Ok(b)
        })
        .collect::<Result<_>>()?;
    let dirac = orbit
        .mesh()
        .switch_node()
        .map(|k| (k, build_a(model, orbit.state(k))));
    let value = condition_d_integral(
        times,
        &direct,
        &dual,
        &smooth,
        dirac.as_ref().map(|(k, a)| (*k, a)),
        stride,
    )?;
    Ok(ConditionD {
        value,
        numerical_only: true,
    })
}

/// Condition (d) with neighbors computed at `tau -/+ delta` from the critical
/// orbit's initial state, which keeps them on the same branch.
pub fn secondary_condition_d<M: SeasonalModel + ?Sized>(
    model: &M,
    orbit: &PeriodicOrbit,
    report: &MonodromyReport,
    config: &SolverConfig,
    delta: f64,
) -> Result<ConditionD> {
    let schedule = orbit.schedule();
    let u0 = orbit.initial_state().to_vec();
    let neighbor = |tau: f64| -> Result<PeriodicOrbit> {
        let s = schedule
            .with_tau(tau)
            .map_err(|e| Error::BranchDerivative(e.to_string()))?;
        find_equilibrium(model, &s, &u0, config)
    };
    let below = neighbor(schedule.tau() - delta)?;
    let above = neighbor(schedule.tau() + delta)?;
    secondary_condition_d_from_neighbors(model, orbit, report, &below, &above, delta, 1)
}

/// `u(t) + sigma G(t, 0) phi0` with `phi0` scaled so that its second entry is 1.
pub fn secondary_branch_approx(
    orbit: &PeriodicOrbit,
    report: &MonodromyReport,
    fundamental: &FundamentalMatrixPath,
    sigma: f64,
) -> Result<PeriodicOrbit> {
    let phi0 = report
        .phi0
        .as_ref()
        .filter(|_| report.unit_multiplier_count == 1)
        .ok_or_else(|| Error::Precondition("secondary branch needs exactly one unit multiplier".into()))?;
    if phi0.len() < 2 || phi0[1].abs() < 1e-12 {
        return Err(Error::Precondition(
            "kernel vector has no second-species component".into(),
        ));
    }
    let scaled = phi0 / phi0[1];
    shifted_orbit(orbit, fundamental, &scaled, sigma)
}
