//! Closed-form reference solutions for the Lotka-Volterra/Malthus family
//! and its scalar restriction. These are independent of the time integrator
//! and serve as cross-checks for it.
//!
//! Scalar restriction: on the growth season `v' = v (alpha - beta v)` has the
//! logistic flow
//!
//! ```text
//! v(t) = alpha v0 e^{alpha t} / (alpha + beta v0 (e^{alpha t} - 1))
//! ```
//!
//! and on the decline season `v' = -mu v` decays exponentially. Requiring
//! `v(1) = v(0)` gives
//!
//! ```text
//! v0 = alpha (e^{alpha tau - mu (1 - tau)} - 1) / (beta (e^{alpha tau} - 1)),
//! ```
//!
//! positive exactly when `tau > mu / (alpha + mu)`. Integrating
//! `(ln v)' = alpha - beta v` over the growth season and using periodicity
//! yields `int_0^tau v = (alpha tau - mu (1 - tau)) / beta`.

use nalgebra::DMatrix;

use crate::equilibrium::PeriodicOrbit;
use crate::error::{invalid, Result};
use crate::integrator::FundamentalMatrixPath;
use crate::mollifier::SeasonSchedule;
use crate::models::LVMalthusParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarRegime {
    Persistence,
    Extinction,
}

/// Periodic solution of the scalar logistic/Malthus system with sharp
/// transitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarSeasonSolution {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub tau: f64,
    pub v0: f64,
    pub regime: ScalarRegime,
}

impl ScalarSeasonSolution {
    /// Value of the periodic orbit at `t` in `[0, 1]`.
    pub fn value_at(&self, t: f64) -> f64 {
        if self.v0 == 0.0 {
            return 0.0;
        }
        let logistic = |s: f64| {
            let e = (self.alpha * s).exp();
            self.alpha * self.v0 * e / (self.alpha + self.beta * self.v0 * (e - 1.0))
        };
        if t <= self.tau {
            logistic(t)
        } else {
            logistic(self.tau) * (-self.mu * (t - self.tau)).exp()
        }
    }

    /// `int_0^tau v(t) dt` in closed form.
    pub fn growth_integral(&self) -> f64 {
        match self.regime {
            ScalarRegime::Extinction => 0.0,
            ScalarRegime::Persistence => {
                (self.alpha * self.tau - self.mu * (1.0 - self.tau)) / self.beta
            }
        }
    }
}

pub fn scalar_equilibrium_closed_form(
    alpha: f64,
    beta: f64,
    mu: f64,
    tau: f64,
) -> Result<ScalarSeasonSolution> {
    if !(alpha > 0.0 && beta > 0.0 && mu > 0.0) {
        return Err(invalid("scalar coefficients must be positive"));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(invalid(format!("tau must lie in (0, 1), got {tau}")));
    }
    let exponent = alpha * tau - mu * (1.0 - tau);
    let (v0, regime) = if exponent <= 0.0 {
        (0.0, ScalarRegime::Extinction)
    } else {
        (
            alpha * exponent.exp_m1() / (beta * (alpha * tau).exp_m1()),
            ScalarRegime::Persistence,
        )
    };
    Ok(ScalarSeasonSolution {
        alpha,
        beta,
        mu,
        tau,
        v0,
        regime,
    })
}

/// Floquet multipliers of the trivial equilibrium,
/// `exp((alpha_i + mu_i) r_eps(tau) - mu_i r_eps(1))`.
pub fn trivial_floquet_closed_form(params: &LVMalthusParams, schedule: &SeasonSchedule) -> [f64; 2] {
    let r_tau = schedule.r_eps(schedule.tau());
    let r_one = schedule.r_eps(1.0);
    [0, 1].map(|i| ((params.alpha[i] + params.mu[i]) * r_tau - params.mu[i] * r_one).exp())
}

/// Solution of `beta u = alpha`.
pub fn coexistence_equilibrium(params: &LVMalthusParams) -> [f64; 2] {
    let b = params.beta;
    let a = params.alpha;
    let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    [
        (a[0] * b[1][1] - b[0][1] * a[1]) / det,
        (b[0][0] * a[1] - b[1][0] * a[0]) / det,
    ]
}

/// Fundamental matrix along a single-species orbit (`u_2 = 0`) assembled
/// from the triangular closed form: `G_21 = 0`,
/// `G_ii(t, 0) = exp(cal_H_ii(t))` and
/// `G_12(t, 0) = exp(cal_H_11(t)) int_0^t exp(cal_H_22(z) - cal_H_11(z)) H_12(z) dz`,
/// with every time integral evaluated by the trapezoid rule on the orbit mesh.
pub fn nondiagonal_fundamental_closed_form(
    params: &LVMalthusParams,
    orbit: &PeriodicOrbit,
) -> Result<FundamentalMatrixPath> {
    if orbit.dim() != 2 {
        return Err(invalid("closed-form fundamental matrix needs a two-species orbit"));
    }
    if orbit.max_abs_component(1) > 1e-12 {
        return Err(invalid(
            "closed-form fundamental matrix requires u_2 = 0 along the orbit",
        ));
    }
    let (a, b, m) = (params.alpha, params.beta, params.mu);
    let mesh = orbit.mesh();
    let times = mesh.times();
    let n = mesh.nodes();
    let u1 = orbit.component(0);

    // per-step one-sided integrand values at (left, right)
    let h11 = |u: f64, w: &[f64; 2]| (a[0] - 2.0 * b[0][0] * u) * w[0] - m[0] * w[1];
    let h22 = |u: f64, w: &[f64; 2]| (a[1] - b[1][0] * u) * w[0] - m[1] * w[1];
    let h12 = |u: f64, w: &[f64; 2]| -b[0][1] * u * w[0];

    let mut cal11 = vec![0.0; n];
    let mut cal22 = vec![0.0; n];
    for k in 0..mesh.steps() {
        let w = mesh.stage_weights(k);
        let h = mesh.step_width(k);
        cal11[k + 1] = cal11[k] + 0.5 * h * (h11(u1[k], &w[0]) + h11(u1[k + 1], &w[2]));
        cal22[k + 1] = cal22[k] + 0.5 * h * (h22(u1[k], &w[0]) + h22(u1[k + 1], &w[2]));
    }
    let mut coupling = vec![0.0; n];
    for k in 0..mesh.steps() {
        let w = mesh.stage_weights(k);
        let h = mesh.step_width(k);
        let left = (cal22[k] - cal11[k]).exp() * h12(u1[k], &w[0]);
        let right = (cal22[k + 1] - cal11[k + 1]).exp() * h12(u1[k + 1], &w[2]);
        coupling[k + 1] = coupling[k] + 0.5 * h * (left + right);
    }
    let matrices = (0..n)
        .map(|k| {
            let g11 = cal11[k].exp();
            DMatrix::from_row_slice(2, 2, &[g11, g11 * coupling[k], 0.0, cal22[k].exp()])
        })
        .collect();
    Ok(FundamentalMatrixPath {
        times: times.to_vec(),
        matrices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::composite_gauss;

    #[test]
    fn scalar_threshold() {
        let s = scalar_equilibrium_closed_form(2.0, 1.0, 1.0, 1.0 / 3.0).unwrap();
        assert_eq!(s.v0, 0.0);
        assert_eq!(s.regime, ScalarRegime::Extinction);
        let s = scalar_equilibrium_closed_form(2.0, 1.0, 1.0, 0.34).unwrap();
        assert!(s.v0 > 0.0);
        let s = scalar_equilibrium_closed_form(2.0, 1.0, 1.0, 0.2).unwrap();
        assert_eq!(s.regime, ScalarRegime::Extinction);
        assert!(scalar_equilibrium_closed_form(2.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn scalar_orbit_is_periodic_and_integrates_to_closed_form() {
        let s = scalar_equilibrium_closed_form(2.0, 1.0, 1.0, 0.6).unwrap();
        assert!((s.value_at(1.0) - s.v0).abs() < 1e-14);
        let u = composite_gauss(|t| s.value_at(t), 0.0, 0.6, 200);
        assert!((u - 0.8).abs() < 1e-8, "{u}");
        assert!((s.growth_integral() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn coexistence_examples() {
        let p = LVMalthusParams::reference();
        let c = coexistence_equilibrium(&p);
        assert!((c[0] - 2.0).abs() < 1e-15 && (c[1] - 0.5).abs() < 1e-15);
        let d = LVMalthusParams::new([3.0, 2.0], [[2.0, 0.0], [0.0, 4.0]], [1.0, 1.0]).unwrap();
        assert_eq!(coexistence_equilibrium(&d), [1.5, 0.5]);
        let p = p.with_beta12(1.0).unwrap();
        let c = coexistence_equilibrium(&p);
        let (fg, _) = crate::models::lv_fields(&p, c);
        assert!(fg.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn trivial_multipliers_sharp() {
        let p = LVMalthusParams::reference();
        let s = SeasonSchedule::sharp(1.0 / 3.0).unwrap();
        let l = trivial_floquet_closed_form(&p, &s);
        assert!((l[0] - 1.0).abs() < 1e-15);
        assert!((l[1] - (-1.0_f64 / 3.0).exp()).abs() < 1e-15);
        let s = SeasonSchedule::sharp(1e-9).unwrap();
        let l = trivial_floquet_closed_form(&p, &s);
        assert!((l[0] - (-1.0_f64).exp()).abs() < 1e-8 && l[1] < 1.0);
    }

    #[test]
    fn closed_form_fundamental_rejects_two_species_orbits() {
        let s = SeasonSchedule::sharp(0.5).unwrap();
        let zero = PeriodicOrbit::zero(s, 0.01, 2).unwrap();
        let both = zero.with_states(vec![0.1; zero.nodes() * 2]).unwrap();
        let p = LVMalthusParams::reference();
        assert!(nondiagonal_fundamental_closed_form(&p, &both).is_err());
        let g = nondiagonal_fundamental_closed_form(&p, &zero).unwrap();
        let l = trivial_floquet_closed_form(&p, &s);
        let mono = g.monodromy();
        assert!((mono[(0, 0)] - l[0]).abs() < 1e-12 && (mono[(1, 1)] - l[1]).abs() < 1e-12);
        assert_eq!(mono[(0, 1)], 0.0);
    }
}
