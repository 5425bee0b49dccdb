//! Linearization along periodic orbits: the matrices `H[tau, u](t)` and
//! `A[u]`, monodromy reports with kernel vectors of `I - G(1, 0)` and its
//! transpose, the dual (adjoint) solution, the transversality integral and
//! the tangent approximation of a bifurcating branch.

use nalgebra::{DMatrix, DVector, Schur};
use nalgebra::Complex;

type Complex64 = Complex<f64>;

use crate::equilibrium::PeriodicOrbit;
use crate::error::{invalid, Error, Result};
use crate::integrator::{integrate_adjoint, integrate_variational, FundamentalMatrixPath};
use crate::mollifier::SeasonSchedule;
use crate::models::SeasonalModel;
use crate::quadrature::trapezoid;

/// Default tolerance for counting multipliers at 1.
pub const UNIT_MULTIPLIER_TOL: f64 = 1e-6;

/// Below this magnitude the transversality integral is inconclusive.
pub const TRANSVERSALITY_FLOOR: f64 = 1e-10;

/// `Df_g(u) chi_g(t) + Df_d(u) chi_d(t)`.
pub fn build_h<M: SeasonalModel + ?Sized>(
    model: &M,
    schedule: &SeasonSchedule,
    u: &[f64],
    t: f64,
) -> DMatrix<f64> {
    let (g, d) = schedule.indicators(t);
    model.growth_jacobian(u) * g + model.decline_jacobian(u) * d
}

/// `Df_g(u) - Df_d(u)`.
pub fn build_a<M: SeasonalModel + ?Sized>(model: &M, u: &[f64]) -> DMatrix<f64> {
    model.growth_jacobian(u) - model.decline_jacobian(u)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonodromyReport {
    pub monodromy: DMatrix<f64>,
    /// Sorted by decreasing modulus.
    pub eigenvalues: Vec<Complex64>,
    pub unit_multiplier_count: usize,
    /// Spans `ker(I - G(1, 0))` when exactly one multiplier sits at 1.
    pub phi0: Option<DVector<f64>>,
    /// Spans `ker(I - G(1, 0)^T)` when exactly one multiplier sits at 1.
    pub phi_r: Option<DVector<f64>>,
    pub smallest_singular_value: f64,
    pub tol: f64,
}

impl MonodromyReport {
    pub fn leading_multiplier(&self) -> Complex64 {
        self.eigenvalues[0]
    }

    pub fn determinant(&self) -> f64 {
        self.monodromy.determinant()
    }

    /// Key-value summary used by the command-line front end.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let vec_str = |v: &Option<DVector<f64>>| match v {
            Some(v) => format!(
                "[{}]",
                v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", ")
            ),
            None => "none".to_string(),
        };
        let n = self.monodromy.nrows();
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|j| format!("{}", self.monodromy[(i, j)])).collect();
            out += &format!("monodromy_row_{} = [{}]\n", i + 1, row.join(", "));
        }
        for (i, l) in self.eigenvalues.iter().enumerate() {
            out += &format!("eigenvalue_{} = {} {:+}i\n", i + 1, l.re, l.im);
        }
        out += &format!("unit_multiplier_tol = {}\n", self.tol);
        out += &format!("unit_multiplier_count = {}\n", self.unit_multiplier_count);
        out += &format!("smallest_singular_value = {}\n", self.smallest_singular_value);
        out += &format!("phi0 = {}\n", vec_str(&self.phi0));
        out += &format!("phi_r = {}\n", vec_str(&self.phi_r));
        out
    }
}

fn normalize_sign(mut v: DVector<f64>) -> DVector<f64> {
    let norm = v.norm();
    if norm > 0.0 {
        v /= norm;
    }
    if let Some(first) = v.iter().copied().find(|x| x.abs() > 1e-12) {
        if first < 0.0 {
            v = -v;
        }
    }
    v.apply(|x| *x += 0.0);
    v
}

/// Eigen-decomposes `G(1, 0)` and extracts kernel vectors of `I - G(1, 0)`
/// from the singular vectors of its smallest singular value.
pub fn report_from_monodromy(monodromy: &DMatrix<f64>, tol: f64) -> Result<MonodromyReport> {
    let n = monodromy.nrows();
    if n == 0 || monodromy.ncols() != n {
        return Err(invalid("monodromy matrix must be square and non-empty"));
    }
    let schur = Schur::try_new(monodromy.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Precondition("eigenvalue iteration did not converge".into()))?;
    let mut eigenvalues: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(b.re.total_cmp(&a.re)));
    let count = eigenvalues
        .iter()
        .filter(|l| (*l - Complex64::new(1.0, 0.0)).norm() < tol)
        .count();

    let defect = DMatrix::<f64>::identity(n, n) - monodromy;
    let svd = defect.svd(true, true);
    let (idx, smallest) = svd
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty");
    let (phi0, phi_r) = if count == 1 {
        let v_t = svd.v_t.as_ref().expect("requested");
        let u = svd.u.as_ref().expect("requested");
        (
            Some(normalize_sign(v_t.row(idx).transpose())),
            Some(normalize_sign(u.column(idx).into_owned())),
        )
    } else {
        (None, None)
    };
    Ok(MonodromyReport {
        monodromy: monodromy.clone(),
        eigenvalues,
        unit_multiplier_count: count,
        phi0,
        phi_r,
        smallest_singular_value: smallest,
        tol,
    })
}

/// Integrates the variational equation along `orbit` and reports on
/// `G(1, 0)`.
pub fn monodromy_report<M: SeasonalModel + ?Sized>(
    model: &M,
    orbit: &PeriodicOrbit,
    tol: f64,
) -> Result<MonodromyReport> {
    let path = integrate_variational(model, orbit)?;
    report_from_monodromy(path.monodromy(), tol)
}

/// Adjoint solution `Phi_R(t) = G(1, t)^T phi_R` at the mesh nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPath {
    pub times: Vec<f64>,
    pub values: Vec<DVector<f64>>,
}

impl DualPath {
    /// `|Phi_R(0) - Phi_R(1)|`.
    pub fn periodic_mismatch(&self) -> f64 {
        (&self.values[0] - self.values.last().expect("non-empty")).norm()
    }
}

pub fn dual_solution<M: SeasonalModel + ?Sized>(
    model: &M,
    orbit: &PeriodicOrbit,
    phi_r_terminal: &DVector<f64>,
) -> Result<DualPath> {
    let values = integrate_adjoint(model, orbit, phi_r_terminal)?;
    Ok(DualPath {
        times: orbit.times().to_vec(),
        values,
    })
}

fn kernel_pair(report: &MonodromyReport) -> Result<(&DVector<f64>, &DVector<f64>)> {
    match (&report.phi0, &report.phi_r) {
        (Some(p0), Some(pr)) if report.unit_multiplier_count == 1 => Ok((p0, pr)),
        _ => Err(Error::Precondition(format!(
            "need exactly one unit multiplier with kernel vectors, found {}",
            report.unit_multiplier_count
        ))),
    }
}

/// Value of the transversality integral
/// `int_0^1 rho_eps(s - tau) Phi_R(s) . A[u(s)] Phi_0(s) ds`
/// (its Dirac limit at `s = tau` for sharp transitions).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transversality {
    pub value: f64,
}

impl Transversality {
    pub fn is_conclusive(&self) -> bool {
        self.value.abs() >= TRANSVERSALITY_FLOOR
    }
}

pub fn transversality<M: SeasonalModel + ?Sized>(
    model: &M,
    report: &MonodromyReport,
    orbit: &PeriodicOrbit,
) -> Result<Transversality> {
    let (phi0, phi_r) = kernel_pair(report)?;
    let path = integrate_variational(model, orbit)?;
    let dual = dual_solution(model, orbit, phi_r)?;
    let pairing = |k: usize| -> f64 {
        let a = build_a(model, orbit.state(k));
        let direct = &path.matrices[k] * phi0;
        dual.values[k].dot(&(a * direct))
    };
    let schedule = orbit.schedule();
    let value = match orbit.mesh().switch_node() {
        Some(k) => pairing(k),
        None => {
            let kernel = schedule.kernel();
            let tau = schedule.tau();
            let half = 0.5 * kernel.epsilon();
            let times = orbit.times();
            let vals: Vec<f64> = times
                .iter()
                .enumerate()
                .map(|(k, &s)| {
                    if (s - tau).abs() >= half {
                        0.0
                    } else {
                        kernel.eval(s - tau).expect("mollified kernel") * pairing(k)
                    }
                })
                .collect();
            trapezoid(times, &vals)
        }
    };
    Ok(Transversality { value })
}

/// `u(t) + s Phi_0(t)` with `Phi_0(t) = G(t, 0) phi0`.
pub fn branch_tangent(
    report: &MonodromyReport,
    orbit: &PeriodicOrbit,
    fundamental: &FundamentalMatrixPath,
    s: f64,
) -> Result<PeriodicOrbit> {
    let phi0 = report.phi0.as_ref().filter(|_| report.unit_multiplier_count == 1).ok_or_else(|| {
        Error::Precondition("branch tangent needs exactly one unit multiplier".into())
    })?;
    shifted_orbit(orbit, fundamental, phi0, s)
}

pub(crate) fn shifted_orbit(
    orbit: &PeriodicOrbit,
    fundamental: &FundamentalMatrixPath,
    direction: &DVector<f64>,
    s: f64,
) -> Result<PeriodicOrbit> {
    if fundamental.matrices.len() != orbit.nodes() {
        return Err(invalid("fundamental path and orbit live on different meshes"));
    }
    let n = orbit.dim();
    let mut states = orbit.states().to_vec();
    for (k, g) in fundamental.matrices.iter().enumerate() {
        let shift = g * direction;
        for i in 0..n {
            states[k * n + i] += s * shift[i];
        }
    }
    orbit.with_states(states)
}
