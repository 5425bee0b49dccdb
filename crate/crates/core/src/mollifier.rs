//! Smoothing kernel, season indicator functions and the cumulative weight
//! `r_eps` for sharp (`epsilon = 0`) and mollified season transitions.
//!
//! The kernel profile is the standard bump
//! `rho(s) = C exp(-1 / (1 - 4 s^2))` on `(-1/2, 1/2)`, rescaled as
//! `rho_eps(s) = rho(s / eps) / eps`. Indicators are evaluated through the
//! antiderivative of the profile, tabulated once at [`CDF_NODES`] nodes and
//! interpolated with cubic Hermite polynomials (the derivative of the
//! antiderivative is the profile itself, which is known exactly).

use std::sync::OnceLock;

use crate::error::{invalid, Error, Result};
use crate::quadrature::{composite_gauss, gauss_legendre5};

/// Number of nodes in the tabulated antiderivative of the bump profile.
pub const CDF_NODES: usize = 4096;

struct BumpTable {
    normalization: f64,
    step: f64,
    cdf: Vec<f64>,
    density: Vec<f64>,
}

fn raw_bump(x: f64) -> f64 {
    let q = 1.0 - 4.0 * x * x;
    if q <= 0.0 {
        0.0
    } else {
        (-1.0 / q).exp()
    }
}

fn table() -> &'static BumpTable {
    static TABLE: OnceLock<BumpTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let step = 1.0 / (CDF_NODES - 1) as f64;
        let mut cdf = Vec::with_capacity(CDF_NODES);
        let mut acc = 0.0;
        cdf.push(0.0);
        for k in 1..CDF_NODES {
            let a = -0.5 + (k - 1) as f64 * step;
            acc += gauss_legendre5(raw_bump, a, a + step);
            cdf.push(acc);
        }
        let normalization = 1.0 / acc;
        for v in &mut cdf {
            *v *= normalization;
        }
        // symmetrize so that P(-x) = 1 - P(x) holds node by node
        for k in 0..CDF_NODES / 2 {
            let j = CDF_NODES - 1 - k;
            let avg = 0.5 * (cdf[k] + (1.0 - cdf[j]));
            cdf[k] = avg;
            cdf[j] = 1.0 - avg;
        }
        let density = (0..CDF_NODES)
            .map(|k| normalization * raw_bump(-0.5 + k as f64 * step))
            .collect();
        BumpTable {
            normalization,
            step,
            cdf,
            density,
        }
    })
}

/// Unit-scale profile `rho`, supported in `(-1/2, 1/2)` with unit mass.
pub fn profile(x: f64) -> f64 {
    table().normalization * raw_bump(x)
}

/// Antiderivative of the unit profile: `P(x) = int_{-1/2}^{x} rho`.
pub fn profile_cdf(x: f64) -> f64 {
    if x <= -0.5 {
        return 0.0;
    }
    if x >= 0.5 {
        return 1.0;
    }
    let tab = table();
    let pos = (x + 0.5) / tab.step;
    let k = (pos.floor() as usize).min(CDF_NODES - 2);
    let h = tab.step;
    let s = pos - k as f64;
    let (p0, p1) = (tab.cdf[k], tab.cdf[k + 1]);
    let (d0, d1) = (tab.density[k] * h, tab.density[k + 1] * h);
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * p0 + h10 * d0 + h01 * p1 + h11 * d1
}

/// Rescaled smoothing kernel. `epsilon = 0` denotes the sharp limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    epsilon: f64,
}

impl KernelSpec {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(invalid(format!("epsilon must lie in [0, 1), got {epsilon}")));
        }
        Ok(Self { epsilon })
    }

    pub fn sharp() -> Self {
        Self { epsilon: 0.0 }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn is_sharp(&self) -> bool {
        self.epsilon == 0.0
    }

    /// Constant `C` making the unit profile integrate to one.
    pub fn normalization(&self) -> f64 {
        table().normalization
    }

    /// `rho_eps(s)`; zero outside `(-eps/2, eps/2)`.
    pub fn eval(&self, s: f64) -> Result<f64> {
        kernel_eval(self, s)
    }
}

pub fn kernel_eval(kernel: &KernelSpec, s: f64) -> Result<f64> {
    if kernel.is_sharp() {
        return Err(Error::SharpKernel);
    }
    let eps = kernel.epsilon;
    Ok(profile(s / eps) / eps)
}

/// Season length together with the transition kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeasonSchedule {
    tau: f64,
    kernel: KernelSpec,
}

impl SeasonSchedule {
    /// Mollified transitions must sit fully inside the period, so for
    /// `epsilon > 0` the season length is restricted to `(eps/2, 1 - eps/2)`.
    pub fn new(tau: f64, kernel: KernelSpec) -> Result<Self> {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(invalid(format!("tau must lie in (0, 1), got {tau}")));
        }
        let half = 0.5 * kernel.epsilon;
        if !kernel.is_sharp() && !(tau > half && tau < 1.0 - half) {
            return Err(invalid(format!(
                "tau = {tau} must lie in (epsilon/2, 1 - epsilon/2) = ({half}, {}) for epsilon = {}",
                1.0 - half,
                kernel.epsilon
            )));
        }
        Ok(Self { tau, kernel })
    }

    pub fn sharp(tau: f64) -> Result<Self> {
        Self::new(tau, KernelSpec::sharp())
    }

    pub fn mollified(tau: f64, epsilon: f64) -> Result<Self> {
        Self::new(tau, KernelSpec::new(epsilon)?)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn epsilon(&self) -> f64 {
        self.kernel.epsilon
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn is_sharp(&self) -> bool {
        self.kernel.is_sharp()
    }

    /// Same kernel, different season length.
    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Self::new(tau, self.kernel)
    }

    pub fn indicators(&self, t: f64) -> (f64, f64) {
        season_indicators(self, t)
    }

    pub fn r_eps(&self, tau_arg: f64) -> f64 {
        r_eps(&self.kernel, tau_arg)
    }
}

/// Growth and decline indicators `(chi_g, chi_d)` at time `t` in `[0, 1]`.
///
/// The sharp growth indicator is 1 on `(0, tau]`; for `epsilon > 0` the
/// indicators are the kernel convolutions of the characteristic functions of
/// `(0, tau)` and `(tau, 1)` without periodic wrap-around.
pub fn season_indicators(schedule: &SeasonSchedule, t: f64) -> (f64, f64) {
    let tau = schedule.tau;
    if schedule.is_sharp() {
        let g = if t > 0.0 && t <= tau { 1.0 } else { 0.0 };
        return (g, 1.0 - g);
    }
    let eps = schedule.kernel.epsilon;
    let p_start = profile_cdf(t / eps);
    let p_switch = profile_cdf((t - tau) / eps);
    let p_end = profile_cdf((t - 1.0) / eps);
    ((p_start - p_switch).clamp(0.0, 1.0), (p_switch - p_end).clamp(0.0, 1.0))
}

/// Indicators by direct quadrature of the kernel (no tabulated antiderivative).
pub fn season_indicators_by_quadrature(
    schedule: &SeasonSchedule,
    t: f64,
    panels: usize,
) -> Result<(f64, f64)> {
    let kernel = schedule.kernel;
    if kernel.is_sharp() {
        return Err(Error::SharpKernel);
    }
    let eps = kernel.epsilon;
    let rho = |s: f64| profile((t - s) / eps) / eps;
    // restrict to the kernel support around t
    let lo = (t - 0.5 * eps).max(0.0);
    let hi = (t + 0.5 * eps).min(1.0);
    let tau = schedule.tau;
    let g = if lo < tau {
        composite_gauss(rho, lo, hi.min(tau), panels)
    } else {
        0.0
    };
    let d = if hi > tau {
        composite_gauss(rho, lo.max(tau), hi, panels)
    } else {
        0.0
    };
    Ok((g, d))
}

/// `r_eps(x) = int_0^x int_0^1 rho_eps(t - s) dt ds`; the identity for the
/// sharp kernel.
pub fn r_eps(kernel: &KernelSpec, tau_arg: f64) -> f64 {
    if kernel.is_sharp() {
        return tau_arg;
    }
    let x = tau_arg.clamp(0.0, 1.0);
    let eps = kernel.epsilon;
    let half = 0.5 * eps;
    // inner integral over t, as a function of s
    let weight = |s: f64| profile_cdf((1.0 - s) / eps) + profile_cdf(s / eps) - 1.0;
    const PANELS: usize = 64;
    let mut total = composite_gauss(weight, 0.0, x.min(half), PANELS);
    if x > half {
        total += x.min(1.0 - half) - half;
    }
    if x > 1.0 - half {
        total += composite_gauss(weight, 1.0 - half, x, PANELS);
    }
    total
}
