//! Cross-checks of the integrators against the closed forms in
//! [`crate::oracles`], on the reference parameters and on seeded random
//! admissible draws.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bifurcation::growth_integral_u;
use crate::equilibrium::{find_equilibrium, period_map, PeriodicOrbit, SolverConfig};
use crate::error::Result;
use crate::integrator::integrate_variational;
use crate::mollifier::SeasonSchedule;
use crate::models::{lv_fields, LVMalthusParams, LogisticMalthus, LogisticMalthusParams, LotkaVolterraMalthus};
use crate::oracles::{
    coexistence_equilibrium, nondiagonal_fundamental_closed_form, scalar_equilibrium_closed_form,
    trivial_floquet_closed_form,
};

pub const DEFAULT_DRAWS: usize = 20;
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub case: String,
    pub check: &'static str,
    pub error: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.error.is_finite() && self.error <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<10} {:<30} {:>12} {:>10}  status", "case", "check", "error", "tol")?;
        for c in &self.checks {
            writeln!(
                f,
                "{:<10} {:<30} {:>12.3e} {:>10.1e}  {}",
                c.case,
                c.check,
                c.error,
                c.tolerance,
                if c.passed() { "pass" } else { "FAIL" }
            )?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

/// Uniform draw from a box, retried until the coexistence inequalities hold.
pub fn random_admissible(rng: &mut impl Rng) -> LVMalthusParams {
    loop {
        let mut u = |lo: f64, hi: f64| lo + (hi - lo) * rng.random::<f64>();
        let alpha = [u(0.5, 3.0), u(0.5, 3.0)];
        let mu = [u(0.5, 2.0), u(0.5, 2.0)];
        let beta = [[u(0.5, 2.0), u(0.0, 1.0)], [u(0.0, 1.0), u(0.5, 2.0)]];
        if let Ok(p) = LVMalthusParams::new(alpha, beta, mu) {
            return p;
        }
    }
}

/// Failed computations are recorded as NaN errors, which never pass.
fn push(out: &mut Vec<CheckResult>, case: &str, check: &'static str, error: f64, tolerance: f64) {
    out.push(CheckResult {
        case: case.to_string(),
        check,
        error,
        tolerance,
    });
}

fn scalar_checks(p: &LVMalthusParams, case: &str, dt: f64, out: &mut Vec<CheckResult>) {
    let (a, b, m) = (p.alpha[0], p.beta[0][0], p.mu[0]);
    let threshold = m / (a + m);
    let tau = threshold + 0.5 * (1.0 - threshold);
    let run = || -> Result<(f64, f64, f64)> {
        let exact = scalar_equilibrium_closed_form(a, b, m, tau)?;
        let model = LogisticMalthus::new(LogisticMalthusParams::new(a, b, m)?);
        let schedule = SeasonSchedule::sharp(tau)?;
        let closure = (period_map(&model, &schedule, &[exact.v0], dt)?[0] - exact.v0).abs();
        let config = SolverConfig {
            dt,
            tol: 1e-13,
            max_periods: 5_000,
        };
        let orbit = find_equilibrium(&model, &schedule, &[exact.v0], &config)?;
        let orbit_err = orbit
            .times()
            .iter()
            .enumerate()
            .map(|(k, &t)| (orbit.state(k)[0] - exact.value_at(t)).abs())
            .fold(0.0, f64::max);
        let u_err = (growth_integral_u(&orbit) - exact.growth_integral()).abs();
        Ok((closure, orbit_err, u_err))
    };
    let (closure, orbit_err, u_err) = run().unwrap_or((f64::NAN, f64::NAN, f64::NAN));
    push(out, case, "scalar period-map closure", closure, 1e-7);
    push(out, case, "scalar orbit max error", orbit_err, 1e-5);
    push(out, case, "scalar growth integral", u_err, 1e-4);
}

fn floquet_checks(p: &LVMalthusParams, case: &str, dt: f64, out: &mut Vec<CheckResult>) {
    let model = LotkaVolterraMalthus::new(*p);
    for (check, eps, tau) in [
        ("trivial multipliers, eps=0", 0.0, 0.45),
        ("trivial multipliers, eps=0.05", 0.05, 0.55),
    ] {
        let run = || -> Result<f64> {
            let schedule = if eps == 0.0 {
                SeasonSchedule::sharp(tau)?
            } else {
                SeasonSchedule::mollified(tau, eps)?
            };
            let zero = PeriodicOrbit::zero(schedule, dt, 2)?;
            let g = integrate_variational(&model, &zero)?;
            let exact = trivial_floquet_closed_form(p, &schedule);
            let mono = g.monodromy();
            Ok((0..2)
                .map(|i| (mono[(i, i)] - exact[i]).abs())
                .chain([mono[(0, 1)].abs(), mono[(1, 0)].abs()])
                .fold(0.0, f64::max))
        };
        push(out, case, check, run().unwrap_or(f64::NAN), 1e-7);
    }
}

fn coexistence_check(p: &LVMalthusParams, case: &str, out: &mut Vec<CheckResult>) {
    let c = coexistence_equilibrium(p);
    let (fg, _) = lv_fields(p, c);
    let err = if c.iter().all(|&v| v > 0.0) {
        fg.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    } else {
        f64::INFINITY
    };
    push(out, case, "coexistence point", err, 1e-12);
}

fn nondiagonal_check(p: &LVMalthusParams, case: &str, dt: f64, out: &mut Vec<CheckResult>) {
    let run = || -> Result<f64> {
        let threshold = p.mu[0] / (p.alpha[0] + p.mu[0]);
        let tau = threshold + 0.5 * (1.0 - threshold);
        let model = LotkaVolterraMalthus::new(*p);
        let schedule = SeasonSchedule::sharp(tau)?;
        let config = SolverConfig {
            dt,
            tol: 1e-12,
            max_periods: 5_000,
        };
        let k1 = p.carrying_capacity()[0];
        let orbit = find_equilibrium(&model, &schedule, &[0.5 * k1, 0.0], &config)?;
        let exact = nondiagonal_fundamental_closed_form(p, &orbit)?;
        let numeric = integrate_variational(&model, &orbit)?;
        Ok((exact.monodromy() - numeric.monodromy()).abs().max())
    };
    push(out, case, "fundamental matrix closed form", run().unwrap_or(f64::NAN), 1e-5);
}

/// Runs every check on `params`, labelled `case`.
pub fn validate_params(p: &LVMalthusParams, case: &str, dt: f64) -> Vec<CheckResult> {
    let mut out = Vec::new();
    scalar_checks(p, case, dt, &mut out);
    floquet_checks(p, case, dt, &mut out);
    coexistence_check(p, case, &mut out);
    nondiagonal_check(p, case, dt, &mut out);
    out
}

/// Reference parameters (with `beta12 = 0.25` for the fundamental-matrix
/// check to exercise the coupling) plus `draws` seeded random draws.
pub fn run_oracle_suite(reference: &LVMalthusParams, draws: usize, seed: u64, dt: f64) -> ValidationReport {
    let mut checks = validate_params(reference, "reference", dt);
    if reference.beta[0][1] == 0.0 {
        if let Ok(coupled) = reference.with_beta12(0.25) {
            let mut extra = Vec::new();
            nondiagonal_check(&coupled, "ref+b12", dt, &mut extra);
            checks.extend(extra);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for d in 0..draws {
        let p = random_admissible(&mut rng);
        checks.extend(validate_params(&p, &format!("draw-{:02}", d + 1), dt));
    }
    ValidationReport { checks }
}
