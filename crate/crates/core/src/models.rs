//! Seasonal models: the growth/decline field pair, Jacobians and the
//! invariant box `[0, K]`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::mollifier::SeasonSchedule;

/// A seasonally switched system `u' = f_g(u) chi_g(t) + f_d(u) chi_d(t)`.
///
/// Implementors must satisfy `f_g(0) = f_d(0) = 0` and leave the box
/// `[0, bound]` invariant; [`check_admissibility`] verifies the sign
/// conditions on the faces of the box numerically.
pub trait SeasonalModel: Send + Sync {
    fn dimension(&self) -> usize;
    fn growth(&self, u: &[f64], out: &mut [f64]);
    fn decline(&self, u: &[f64], out: &mut [f64]);
    fn growth_jacobian(&self, u: &[f64]) -> DMatrix<f64>;
    fn decline_jacobian(&self, u: &[f64]) -> DMatrix<f64>;
    fn bound(&self) -> &[f64];
    fn label(&self) -> &str;
}

/// Competitive Lotka-Volterra growth / Malthusian decline coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LVMalthusParams {
    pub alpha: [f64; 2],
    pub beta: [[f64; 2]; 2],
    pub mu: [f64; 2],
}

impl LVMalthusParams {
    /// Validates positivity and the stable-coexistence inequalities
    /// `b11 b22 > b12 b21` and `b_ii a_j > b_ji a_i` for `i != j`.
    pub fn new(alpha: [f64; 2], beta: [[f64; 2]; 2], mu: [f64; 2]) -> Result<Self> {
        let all = alpha.iter().chain(beta.iter().flatten()).chain(mu.iter());
        if all.clone().any(|v| !v.is_finite()) {
            return Err(invalid("Lotka-Volterra coefficients must be finite"));
        }
        if alpha.iter().any(|&a| a <= 0.0) {
            return Err(invalid(format!("growth rates must be positive, got {alpha:?}")));
        }
        if mu.iter().any(|&m| m <= 0.0) {
            return Err(invalid(format!("decline rates must be positive, got {mu:?}")));
        }
        if beta[0][0] <= 0.0 || beta[1][1] <= 0.0 {
            return Err(invalid("intraspecific coefficients beta11, beta22 must be positive"));
        }
        if beta[0][1] < 0.0 || beta[1][0] < 0.0 {
            return Err(invalid("interspecific coefficients beta12, beta21 must be nonnegative"));
        }
        if beta[0][0] * beta[1][1] <= beta[0][1] * beta[1][0] {
            return Err(invalid("coexistence requires beta11*beta22 > beta12*beta21"));
        }
        for (i, j) in [(0, 1), (1, 0)] {
            if beta[i][i] * alpha[j] <= beta[j][i] * alpha[i] {
                return Err(invalid(format!(
                    "coexistence requires beta{0}{0}*alpha{1} > beta{1}{0}*alpha{0}",
                    i + 1,
                    j + 1
                )));
            }
        }
        Ok(Self { alpha, beta, mu })
    }

    /// Coefficients used in all of the reference experiments (`beta12 = 0`).
    pub fn reference() -> Self {
        Self {
            alpha: [2.0, 1.0],
            beta: [[1.0, 0.0], [0.25, 1.0]],
            mu: [1.0, 1.0],
        }
    }

    pub fn with_beta12(mut self, beta12: f64) -> Result<Self> {
        self.beta[0][1] = beta12;
        Self::new(self.alpha, self.beta, self.mu)
    }

    /// Single-species carrying capacities `alpha_i / beta_ii`.
    pub fn carrying_capacity(&self) -> [f64; 2] {
        [self.alpha[0] / self.beta[0][0], self.alpha[1] / self.beta[1][1]]
    }
}

pub fn lv_fields(params: &LVMalthusParams, u: [f64; 2]) -> ([f64; 2], [f64; 2]) {
    let (a, b, m) = (params.alpha, params.beta, params.mu);
    let fg = [
        u[0] * (a[0] - b[0][0] * u[0] - b[0][1] * u[1]),
        u[1] * (a[1] - b[1][0] * u[0] - b[1][1] * u[1]),
    ];
    let fd = [-m[0] * u[0], -m[1] * u[1]];
    (fg, fd)
}

pub fn lv_jacobians(params: &LVMalthusParams, u: [f64; 2]) -> (DMatrix<f64>, DMatrix<f64>) {
    let (a, b, m) = (params.alpha, params.beta, params.mu);
    let dfg = DMatrix::from_row_slice(
        2,
        2,
        &[
            a[0] - 2.0 * b[0][0] * u[0] - b[0][1] * u[1],
            -b[0][1] * u[0],
            -b[1][0] * u[1],
            a[1] - b[1][0] * u[0] - 2.0 * b[1][1] * u[1],
        ],
    );
    let dfd = DMatrix::from_row_slice(2, 2, &[-m[0], 0.0, 0.0, -m[1]]);
    (dfg, dfd)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LotkaVolterraMalthus {
    params: LVMalthusParams,
    bound: [f64; 2],
}

impl LotkaVolterraMalthus {
    pub fn new(params: LVMalthusParams) -> Self {
        Self {
            bound: params.carrying_capacity(),
            params,
        }
    }

    pub fn reference() -> Self {
        Self::new(LVMalthusParams::reference())
    }

    pub fn params(&self) -> &LVMalthusParams {
        &self.params
    }

    /// Half of the only-growth coexistence state; the default initial datum.
    pub fn half_coexistence(&self) -> [f64; 2] {
        let c = crate::oracles::coexistence_equilibrium(&self.params);
        [0.5 * c[0], 0.5 * c[1]]
    }
}

impl SeasonalModel for LotkaVolterraMalthus {
    fn dimension(&self) -> usize {
        2
    }

    fn growth(&self, u: &[f64], out: &mut [f64]) {
        let (a, b) = (&self.params.alpha, &self.params.beta);
        out[0] = u[0] * (a[0] - b[0][0] * u[0] - b[0][1] * u[1]);
        out[1] = u[1] * (a[1] - b[1][0] * u[0] - b[1][1] * u[1]);
    }

    fn decline(&self, u: &[f64], out: &mut [f64]) {
        out[0] = -self.params.mu[0] * u[0];
        out[1] = -self.params.mu[1] * u[1];
    }

    fn growth_jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        lv_jacobians(&self.params, [u[0], u[1]]).0
    }

    fn decline_jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        lv_jacobians(&self.params, [u[0], u[1]]).1
    }

    fn bound(&self) -> &[f64] {
        &self.bound
    }

    fn label(&self) -> &str {
        "lv-malthus"
    }
}

/// Scalar logistic growth `v (alpha - beta v)` with Malthusian decline `-mu v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticMalthusParams {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
}

impl LogisticMalthusParams {
    pub fn new(alpha: f64, beta: f64, mu: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0 && mu > 0.0) {
            return Err(invalid(format!(
                "logistic/Malthus coefficients must be positive, got alpha={alpha}, beta={beta}, mu={mu}"
            )));
        }
        Ok(Self { alpha, beta, mu })
    }

    /// `f_g(v) = r v (1 - v)`, `f_d(v) = -mu v`.
    pub fn from_rate(r: f64, mu: f64) -> Result<Self> {
        Self::new(r, r, mu)
    }
}

pub fn logistic_malthus_fields(params: &LogisticMalthusParams, u: f64) -> (f64, f64) {
    (u * (params.alpha - params.beta * u), -params.mu * u)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticMalthus {
    params: LogisticMalthusParams,
    bound: [f64; 1],
}

impl LogisticMalthus {
    pub fn new(params: LogisticMalthusParams) -> Self {
        Self {
            bound: [params.alpha / params.beta],
            params,
        }
    }

    pub fn params(&self) -> &LogisticMalthusParams {
        &self.params
    }
}

impl SeasonalModel for LogisticMalthus {
    fn dimension(&self) -> usize {
        1
    }

    fn growth(&self, u: &[f64], out: &mut [f64]) {
        out[0] = u[0] * (self.params.alpha - self.params.beta * u[0]);
    }

    fn decline(&self, u: &[f64], out: &mut [f64]) {
        out[0] = -self.params.mu * u[0];
    }

    fn growth_jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, self.params.alpha - 2.0 * self.params.beta * u[0])
    }

    fn decline_jacobian(&self, _u: &[f64]) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, -self.params.mu)
    }

    fn bound(&self) -> &[f64] {
        &self.bound
    }

    fn label(&self) -> &str {
        "logistic-malthus"
    }
}

/// Right-hand side `f_g(u) chi_g(t) + f_d(u) chi_d(t)`.
pub fn rhs_seasonal<M: SeasonalModel + ?Sized>(
    model: &M,
    schedule: &SeasonSchedule,
    t: f64,
    u: &[f64],
) -> Vec<f64> {
    let n = model.dimension();
    let (g, d) = schedule.indicators(t);
    let mut fg = vec![0.0; n];
    let mut fd = vec![0.0; n];
    model.growth(u, &mut fg);
    model.decline(u, &mut fd);
    fg.iter().zip(&fd).map(|(a, b)| a * g + b * d).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Season {
    Growth,
    Decline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Face {
    Lower,
    Upper,
}

/// First point where a sign condition on the faces of `[0, K]` fails.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub point: Vec<f64>,
    pub component: usize,
    pub face: Face,
    pub season: Season,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub samples: usize,
    pub origin_residual: f64,
    pub violation: Option<Violation>,
}

impl AdmissibilityReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none() && self.origin_residual == 0.0
    }
}

/// Samples `samples` random points on every face `u_i = 0` and `u_i = K_i`
/// and checks `f_i >= 0` on the lower faces and `f_i <= 0` on the upper faces
/// for both fields. Also checks that the origin is a common zero.
pub fn check_admissibility<M: SeasonalModel + ?Sized>(
    model: &M,
    samples: usize,
) -> Result<AdmissibilityReport> {
    let n = model.dimension();
    let bound = model.bound().to_vec();
    if bound.len() != n || bound.iter().any(|&k| !(k > 0.0)) {
        return Err(invalid(format!("bound must have {n} positive entries, got {bound:?}")));
    }
    let mut fg = vec![0.0; n];
    let mut fd = vec![0.0; n];
    let zero = vec![0.0; n];
    model.growth(&zero, &mut fg);
    model.decline(&zero, &mut fd);
    let origin_residual = fg.iter().chain(&fd).fold(0.0_f64, |m, v| m.max(v.abs()));

    const SLACK: f64 = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut point = vec![0.0; n];
    for i in 0..n {
        for face in [Face::Lower, Face::Upper] {
            for _ in 0..samples {
                for (j, p) in point.iter_mut().enumerate() {
                    *p = rng.random::<f64>() * bound[j];
                }
                point[i] = match face {
                    Face::Lower => 0.0,
                    Face::Upper => bound[i],
                };
                model.growth(&point, &mut fg);
                model.decline(&point, &mut fd);
                for (season, value) in [(Season::Growth, fg[i]), (Season::Decline, fd[i])] {
                    let ok = match face {
                        Face::Lower => value >= -SLACK,
                        Face::Upper => value <= SLACK,
                    };
                    if !ok {
                        return Ok(AdmissibilityReport {
                            samples,
                            origin_residual,
                            violation: Some(Violation {
                                point: point.clone(),
                                component: i,
                                face,
                                season,
                                value,
                            }),
                        });
                    }
                }
            }
        }
    }
    Ok(AdmissibilityReport {
        samples,
        origin_residual,
        violation: None,
    })
}
