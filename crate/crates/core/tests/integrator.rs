#![allow(clippy::needless_range_loop)]

use nalgebra::DVector;
use proptest::prelude::*;
use season_bifurc::equilibrium::{find_equilibrium, l2_norm_component, period_map};
use season_bifurc::integrator::{integrate_horizon, integrate_period, integrate_variational, PeriodMesh};
use season_bifurc::oracles::scalar_equilibrium_closed_form;
use season_bifurc::validation::random_admissible;
use season_bifurc::{
    LVMalthusParams, LogisticMalthus, LogisticMalthusParams, LotkaVolterraMalthus, SeasonSchedule, SeasonalModel,
    SolverConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const DT: f64 = 0.1 / 365.0;

#[test]
fn scalar_end_state_matches_closed_form() {
    let exact = scalar_equilibrium_closed_form(2.0, 1.0, 1.0, 0.7).unwrap();
    let m = LogisticMalthus::new(LogisticMalthusParams::new(2.0, 1.0, 1.0).unwrap());
    let s = SeasonSchedule::sharp(0.7).unwrap();
    let tr = integrate_period(&m, &s, &[exact.v0], DT).unwrap();
    assert!((tr.final_state()[0] - exact.v0).abs() < 1e-8);
    assert!((period_map(&m, &s, &[exact.v0], DT).unwrap()[0] - exact.v0).abs() < 1e-7);
}

#[test]
fn rk4_order_on_scalar_problem() {
    // fast rates so the error stays well above round-off on the coarsest mesh
    let (a, b, mu, tau) = (150.0, 100.0, 80.0, 0.7);
    let exact = scalar_equilibrium_closed_form(a, b, mu, tau).unwrap();
    let m = LogisticMalthus::new(LogisticMalthusParams::new(a, b, mu).unwrap());
    let s = SeasonSchedule::sharp(tau).unwrap();
    let v0 = 0.05;
    let reference = {
        // end state from the closed-form per-season solutions started at v0
        let k = a / b;
        let grow = k / (1.0 + (k / v0 - 1.0) * (-a * tau).exp());
        grow * (-mu * (1.0 - tau)).exp()
    };
    assert!(exact.v0 > 0.0);
    let err: Vec<f64> = [0.4, 0.2, 0.1]
        .iter()
        .map(|h| (period_map(&m, &s, &[v0], h / 365.0).unwrap()[0] - reference).abs())
        .collect();
    assert!(err[0] / err[1] >= 8.0 && err[1] / err[2] >= 8.0, "{err:?}");
}

#[test]
fn composition_at_the_switch() {
    let m = LotkaVolterraMalthus::new(LVMalthusParams::reference().with_beta12(0.5).unwrap());
    let tau = 146.0 / 365.0;
    let s = SeasonSchedule::sharp(tau).unwrap();
    let full = integrate_period(&m, &s, &[1.0, 0.25], DT).unwrap();
    let k = PeriodMesh::new(&s, DT).unwrap().switch_node().unwrap();
    assert!((full.times()[k] - tau).abs() < 1e-15);
    // growth field alone on [0, tau], decline field alone on [tau, 1]
    let rk4 = |f: &dyn Fn(&[f64], &mut [f64]), u: &mut Vec<f64>, h: f64, steps: usize| {
        let n = u.len();
        let (mut k1, mut k2, mut k3, mut k4, mut w) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for _ in 0..steps {
            f(u, &mut k1);
            for i in 0..n { w[i] = u[i] + 0.5 * h * k1[i]; }
            f(&w, &mut k2);
            for i in 0..n { w[i] = u[i] + 0.5 * h * k2[i]; }
            f(&w, &mut k3);
            for i in 0..n { w[i] = u[i] + h * k3[i]; }
            f(&w, &mut k4);
            for i in 0..n { u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]); }
        }
    };
    let mut u = vec![1.0, 0.25];
    let steps_g = k;
    let steps_d = full.len() - 1 - k;
    rk4(&|x, o| m.growth(x, o), &mut u, tau / steps_g as f64, steps_g);
    for i in 0..2 {
        assert!((u[i] - full.state(k)[i]).abs() < 1e-12);
    }
    rk4(&|x, o| m.decline(x, o), &mut u, (1.0 - tau) / steps_d as f64, steps_d);
    for i in 0..2 {
        assert!((u[i] - full.final_state()[i]).abs() < 1e-12);
    }
}

#[test]
fn extinction_below_primary_value() {
    let m = LotkaVolterraMalthus::reference();
    let s = SeasonSchedule::sharp(0.3).unwrap();
    let tr = integrate_horizon(&m, &s, &[1.0, 0.25], 200, DT).unwrap();
    let per = tr.len() / 200;
    let last = (tr.len() - per..tr.len()).map(|k| tr.state(k)[0].max(tr.state(k)[1])).fold(0.0, f64::max);
    assert!(last < 1e-3);
}

#[test]
fn slow_logistic_oscillates_with_the_seasons() {
    let m = LogisticMalthus::new(LogisticMalthusParams::from_rate(0.01, 0.005).unwrap());
    let s = SeasonSchedule::sharp(0.7).unwrap();
    let tr = integrate_horizon(&m, &s, &[0.5], 3, DT).unwrap();
    let at = |t: f64| tr.state((t / tr.times()[1]).round() as usize)[0];
    for p in 1..3 {
        let p = p as f64;
        assert!(at(p + 0.7) > at(p));
        assert!(at(p + 1.0) < at(p + 0.7));
    }
}

#[test]
fn variational_starts_at_identity_and_is_second_order_consistent() {
    let m = LotkaVolterraMalthus::new(LVMalthusParams::reference().with_beta12(0.5).unwrap());
    let s = SeasonSchedule::mollified(0.55, 0.05).unwrap();
    let tr = integrate_period(&m, &s, &[1.0, 0.25], DT).unwrap();
    let orbit = season_bifurc::PeriodicOrbit::from_states(s, PeriodMesh::new(&s, DT).unwrap(), 2, tr.states().to_vec()).unwrap();
    let g = integrate_variational(&m, &orbit).unwrap();
    assert_eq!(g.matrices[0], nalgebra::DMatrix::identity(2, 2));
    let base = DVector::from_vec(period_map(&m, &s, &[1.0, 0.25], DT).unwrap());
    let defect = |size: f64| {
        let d = DVector::from_vec(vec![0.6 * size, -0.8 * size]);
        let p = DVector::from_vec(period_map(&m, &s, &[1.0 + d[0], 0.25 + d[1]], DT).unwrap());
        (p - &base - g.monodromy() * d).norm()
    };
    let ratio = defect(1e-3) / defect(1e-4);
    assert!(ratio > 50.0, "{ratio}");
}

#[test]
fn fixed_point_certificate_and_norms() {
    let m = LotkaVolterraMalthus::reference();
    let cfg = SolverConfig::default();
    let below = find_equilibrium(&m, &SeasonSchedule::sharp(0.3).unwrap(), &[1.0, 0.25], &cfg).unwrap();
    assert!(below.converged);
    assert!(l2_norm_component(&below, 0).unwrap() < 1e-6 && l2_norm_component(&below, 1).unwrap() < 1e-6);

    let s = SeasonSchedule::sharp(0.45).unwrap();
    let orbit = find_equilibrium(&m, &s, &[1.0, 0.25], &cfg).unwrap();
    assert!(l2_norm_component(&orbit, 0).unwrap() > 0.01);
    assert!(l2_norm_component(&orbit, 1).unwrap() < 1e-6);
    let img = period_map(&m, &s, orbit.initial_state(), DT).unwrap();
    let gap = img.iter().zip(orbit.initial_state()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if orbit.converged {
        assert!(gap <= 10.0 * cfg.tol.max(f64::EPSILON));
    }
    let tail = &orbit.residual_history[orbit.residual_history.len().saturating_sub(10)..];
    assert!(tail.windows(2).all(|w| w[1] <= w[0] || w[1] < 1e-14));

    let both = find_equilibrium(&m, &SeasonSchedule::sharp(0.7).unwrap(), &[1.0, 0.25], &cfg).unwrap();
    assert!(l2_norm_component(&both, 0).unwrap() > 0.01 && l2_norm_component(&both, 1).unwrap() > 0.01);
}

#[test]
fn l2_norm_of_scalar_equilibrium() {
    let exact = scalar_equilibrium_closed_form(2.0, 1.0, 1.0, 0.7).unwrap();
    let m = LogisticMalthus::new(LogisticMalthusParams::new(2.0, 1.0, 1.0).unwrap());
    let s = SeasonSchedule::sharp(0.7).unwrap();
    let orbit = find_equilibrium(&m, &s, &[exact.v0], &SolverConfig { dt: DT, tol: 1e-13, max_periods: 1000 }).unwrap();
    let n = 1_000_000;
    let sq: f64 = (0..=n)
        .map(|k| {
            let t = k as f64 / n as f64;
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            w * exact.value_at(t).powi(2)
        })
        .sum::<f64>()
        / n as f64;
    assert!((l2_norm_component(&orbit, 0).unwrap() - sq.sqrt()).abs() < 1e-5);
}

#[test]
fn small_states_decay_below_primary_value() {
    let m = LotkaVolterraMalthus::reference();
    let s = SeasonSchedule::sharp(0.25).unwrap();
    let u = [1e-3, 2e-3];
    let p = period_map(&m, &s, &u, DT).unwrap();
    assert!(p[0].hypot(p[1]) < u[0].hypot(u[1]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trajectories_stay_in_the_box(seed in 0u64..10_000, tau in 0.05f64..0.95, x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let p = random_admissible(&mut ChaCha8Rng::seed_from_u64(seed));
        let m = LotkaVolterraMalthus::new(p);
        let k = m.bound().to_vec();
        let s = SeasonSchedule::sharp(tau).unwrap();
        let tr = integrate_horizon(&m, &s, &[x * k[0], y * k[1]], 3, 1.0 / 365.0).unwrap();
        for node in 0..tr.len() {
            for i in 0..2 {
                let v = tr.state(node)[i];
                prop_assert!(v >= -1e-9 && v <= k[i] + 1e-9);
            }
        }
    }
}
