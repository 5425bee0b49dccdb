use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use season_bifurc::equilibrium::{find_equilibrium, period_map};
use season_bifurc::integrator::integrate_variational;
use season_bifurc::linearization::{
    branch_tangent, build_a, dual_solution, monodromy_report, report_from_monodromy, transversality, MonodromyReport,
    UNIT_MULTIPLIER_TOL,
};
use season_bifurc::oracles::trivial_floquet_closed_form;
use season_bifurc::{KernelSpec, LotkaVolterraMalthus, PeriodicOrbit, SeasonSchedule, SeasonalModel, SolverConfig};

const DT: f64 = 0.1 / 365.0;

/// `u' = G u` in the growth season and `u' = D u` in the decline season.
struct Linear {
    g: DMatrix<f64>,
    d: DMatrix<f64>,
}

impl SeasonalModel for Linear {
    fn dimension(&self) -> usize {
        self.g.nrows()
    }
    fn growth(&self, u: &[f64], out: &mut [f64]) {
        out.copy_from_slice((&self.g * DVector::from_column_slice(u)).as_slice());
    }
    fn decline(&self, u: &[f64], out: &mut [f64]) {
        out.copy_from_slice((&self.d * DVector::from_column_slice(u)).as_slice());
    }
    fn growth_jacobian(&self, _: &[f64]) -> DMatrix<f64> {
        self.g.clone()
    }
    fn decline_jacobian(&self, _: &[f64]) -> DMatrix<f64> {
        self.d.clone()
    }
    fn bound(&self) -> &[f64] {
        &[1.0, 1.0]
    }
    fn label(&self) -> &str {
        "linear"
    }
}

fn zero_orbit(tau: f64, eps: f64) -> PeriodicOrbit {
    let s = SeasonSchedule::new(tau, KernelSpec::new(eps).unwrap()).unwrap();
    PeriodicOrbit::zero(s, DT, 2).unwrap()
}

#[test]
fn trivial_orbit_at_primary_value() {
    let m = LotkaVolterraMalthus::reference();
    let r = monodromy_report(&m, &zero_orbit(1.0 / 3.0, 0.0), UNIT_MULTIPLIER_TOL).unwrap();
    assert_eq!(r.unit_multiplier_count, 1);
    assert!((r.eigenvalues[0].re - 1.0).abs() < 1e-6);
    assert!((r.eigenvalues[1].re - (-1.0f64 / 3.0).exp()).abs() < 1e-10);
    assert_eq!(r.phi0.as_ref().unwrap().as_slice(), &[1.0, 0.0]);
    assert_eq!(r.phi_r.as_ref().unwrap().as_slice(), &[1.0, 0.0]);
}

#[test]
fn trivial_orbit_below_primary_value_is_stable() {
    let m = LotkaVolterraMalthus::reference();
    let r = monodromy_report(&m, &zero_orbit(0.2, 0.0), UNIT_MULTIPLIER_TOL).unwrap();
    assert_eq!(r.unit_multiplier_count, 0);
    assert!(r.eigenvalues.iter().all(|l| l.norm() < 1.0));
    assert!(r.phi0.is_none());
}

#[test]
fn a_matrix_at_origin_is_positive_diagonal() {
    let m = LotkaVolterraMalthus::new(season_bifurc::LVMalthusParams::reference().with_beta12(0.7).unwrap());
    let a = build_a(&m, &[0.0, 0.0]);
    assert_eq!(a, DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 2.0]));
}

#[test]
fn eigenvalue_product_equals_determinant_on_equilibria() {
    let m = LotkaVolterraMalthus::reference();
    let cfg = SolverConfig::default();
    for tau in [0.45, 0.7, 0.9] {
        let s = SeasonSchedule::sharp(tau).unwrap();
        let orbit = find_equilibrium(&m, &s, &[1.0, 0.25], &cfg).unwrap();
        let r = monodromy_report(&m, &orbit, UNIT_MULTIPLIER_TOL).unwrap();
        let prod = r.eigenvalues.iter().fold(nalgebra::Complex::new(1.0, 0.0), |p, l| p * l);
        assert!(r.determinant() > 0.0);
        assert!((prod.re - r.determinant()).abs() < 1e-12 && prod.im.abs() < 1e-12);
    }
}

#[test]
fn variational_matches_finite_difference_of_period_map() {
    let m = LotkaVolterraMalthus::new(season_bifurc::LVMalthusParams::reference().with_beta12(0.5).unwrap());
    let s = SeasonSchedule::sharp(0.7).unwrap();
    let dt = 1.0 / 3650.0;
    let orbit = find_equilibrium(&m, &s, &[1.0, 0.25], &SolverConfig { dt, tol: 1e-13, max_periods: 5000 }).unwrap();
    let g = integrate_variational(&m, &orbit).unwrap();
    let u = orbit.initial_state().to_vec();
    let h = 1e-6;
    for j in 0..2 {
        let mut up = u.clone();
        let mut dn = u.clone();
        up[j] += h;
        dn[j] -= h;
        let pu = period_map(&m, &s, &up, dt).unwrap();
        let pd = period_map(&m, &s, &dn, dt).unwrap();
        for i in 0..2 {
            let fd = (pu[i] - pd[i]) / (2.0 * h);
            assert!((g.monodromy()[(i, j)] - fd).abs() < 1e-7, "({i},{j})");
        }
    }
}

#[test]
fn trivial_monodromy_is_the_diagonal_exponential() {
    let m = LotkaVolterraMalthus::reference();
    for eps in [0.0, 0.05, 0.1] {
        for tau in [0.2, 0.5, 0.8] {
            let orbit = zero_orbit(tau, eps);
            let g = integrate_variational(&m, &orbit).unwrap();
            let exact = trivial_floquet_closed_form(m.params(), orbit.schedule());
            let diag = DMatrix::from_diagonal(&DVector::from_row_slice(&exact));
            assert!((g.monodromy() - diag).abs().max() < 1e-8);
        }
    }
}

#[test]
fn leading_trivial_multiplier_increases_with_tau() {
    let m = LotkaVolterraMalthus::reference();
    for eps in [0.0, 0.1] {
        let lead: Vec<f64> = (1..18)
            .map(|k| {
                let r = monodromy_report(&m, &zero_orbit(0.05 * k as f64 + 0.03, eps), 1e-6).unwrap();
                r.leading_multiplier().re
            })
            .collect();
        assert!(lead.windows(2).all(|w| w[1] > w[0]), "{lead:?}");
    }
}

#[test]
fn dual_of_trivial_orbit_is_exponential() {
    let m = LotkaVolterraMalthus::reference();
    let orbit = zero_orbit(1.0 / 3.0, 0.0);
    let phi = DVector::from_vec(vec![0.6, 0.8]);
    let dual = dual_solution(&m, &orbit, &phi).unwrap();
    let (a, mu, tau) = (m.params().alpha, m.params().mu, 1.0 / 3.0);
    let cal_h = |i: usize, t: f64| if t <= tau { a[i] * t } else { a[i] * tau - mu[i] * (t - tau) };
    for (k, &t) in orbit.times().iter().enumerate().step_by(97) {
        for i in 0..2 {
            // Phi_R(t) = exp(cal_H(1) - cal_H(t)) phi
            let exact = (cal_h(i, 1.0) - cal_h(i, t)).exp() * phi[i];
            assert!((dual.values[k][i] - exact).abs() < 1e-10, "t = {t}");
        }
    }
    let r = monodromy_report(&m, &orbit, UNIT_MULTIPLIER_TOL).unwrap();
    let dual = dual_solution(&m, &orbit, r.phi_r.as_ref().unwrap()).unwrap();
    assert!(dual.periodic_mismatch() < 1e-10);
}

#[test]
fn dual_with_constant_h_is_matrix_exponential() {
    let h = DMatrix::from_row_slice(2, 2, &[-0.3, 0.8, -0.5, 0.1]);
    let model = Linear { g: h.clone(), d: h.clone() };
    let s = SeasonSchedule::sharp(0.5).unwrap();
    let orbit = PeriodicOrbit::zero(s, 1e-3, 2).unwrap();
    let phi = DVector::from_vec(vec![1.0, -2.0]);
    let dual = dual_solution(&model, &orbit, &phi).unwrap();
    let start = dual.values[0].clone();
    assert!((&start - h.transpose().exp() * &phi).norm() < 1e-10);
    for (k, &t) in orbit.times().iter().enumerate().step_by(50) {
        let exact = (-(h.transpose() * t)).exp() * &start;
        assert!((&dual.values[k] - exact).norm() < 1e-10);
    }
}

#[test]
fn duality_pairing_is_conserved() {
    let m = LotkaVolterraMalthus::new(season_bifurc::LVMalthusParams::reference().with_beta12(0.5).unwrap());
    let s = SeasonSchedule::mollified(0.7, 0.05).unwrap();
    let orbit = find_equilibrium(&m, &s, &[1.0, 0.25], &SolverConfig { dt: 1e-3, tol: 1e-12, max_periods: 5000 }).unwrap();
    let g = integrate_variational(&m, &orbit).unwrap();
    let phi0 = DVector::from_vec(vec![0.3, -1.1]);
    let psi = DVector::from_vec(vec![0.9, 0.4]);
    let dual = dual_solution(&m, &orbit, &psi).unwrap();
    let pairing: Vec<f64> = (0..orbit.nodes()).map(|k| dual.values[k].dot(&(&g.matrices[k] * &phi0))).collect();
    assert!(pairing.iter().all(|p| (p - pairing[0]).abs() < 1e-8));
}

#[test]
fn transversality_positive_at_primary_values() {
    let m = LotkaVolterraMalthus::reference();
    let mut values = Vec::new();
    for eps in [0.0, 0.05] {
        let k = KernelSpec::new(eps).unwrap();
        let tau = season_bifurc::bifurcation::primary_critical(m.params(), &k).unwrap().tau_value;
        let orbit = zero_orbit(tau, eps);
        let r = monodromy_report(&m, &orbit, UNIT_MULTIPLIER_TOL).unwrap();
        assert_eq!(r.unit_multiplier_count, 1);
        let t = transversality(&m, &r, &orbit).unwrap();
        assert!(t.value > 0.0 && t.is_conclusive());
        values.push(t.value);
    }
    assert!((values[1] - values[0]).abs() < 0.1 * values[0]);
}

#[test]
fn degenerate_transversality_is_flagged() {
    let model = Linear {
        g: DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, -0.5])),
        d: DMatrix::from_diagonal(&DVector::from_vec(vec![-0.5, 0.5])),
    };
    let s = SeasonSchedule::sharp(0.5).unwrap();
    let orbit = PeriodicOrbit::zero(s, 1e-3, 2).unwrap();
    let v = DVector::from_vec(vec![1.0, 1.0]) / 2f64.sqrt();
    let report = MonodromyReport {
        monodromy: DMatrix::identity(2, 2),
        eigenvalues: vec![nalgebra::Complex::new(1.0, 0.0); 2],
        unit_multiplier_count: 1,
        phi0: Some(v.clone()),
        phi_r: Some(v),
        smallest_singular_value: 0.0,
        tol: 1e-6,
    };
    assert_eq!(build_a(&model, &[0.0, 0.0]), DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0])));
    let t = transversality(&model, &report, &orbit).unwrap();
    assert!(t.value.abs() < 1e-10);
    assert!(!t.is_conclusive());
}

#[test]
fn transversality_requires_simple_unit_multiplier() {
    let m = LotkaVolterraMalthus::reference();
    let orbit = zero_orbit(0.2, 0.0);
    let r = monodromy_report(&m, &orbit, UNIT_MULTIPLIER_TOL).unwrap();
    assert!(transversality(&m, &r, &orbit).is_err());
    let g = integrate_variational(&m, &orbit).unwrap();
    assert!(branch_tangent(&r, &orbit, &g, 0.1).is_err());
}

#[test]
fn branch_tangent_at_primary_value() {
    let m = LotkaVolterraMalthus::reference();
    let tau = 1.0 / 3.0;
    let orbit = zero_orbit(tau, 0.0);
    let g = integrate_variational(&m, &orbit).unwrap();
    let r = monodromy_report(&m, &orbit, UNIT_MULTIPLIER_TOL).unwrap();
    assert_eq!(branch_tangent(&r, &orbit, &g, 0.0).unwrap().states(), orbit.states());
    let t1 = branch_tangent(&r, &orbit, &g, 0.01).unwrap();
    assert_eq!(t1.max_abs_component(1), 0.0);
    for (k, &t) in orbit.times().iter().enumerate() {
        let cal_h = if t <= tau { 2.0 * t } else { 2.0 * tau - (t - tau) };
        assert!((t1.state(k)[0] - 0.01 * cal_h.exp()).abs() < 1e-12);
    }
    let residual = |s: f64| {
        let u = branch_tangent(&r, &orbit, &g, s).unwrap();
        let end = period_map(&m, orbit.schedule(), u.initial_state(), DT).unwrap();
        ((end[0] - u.initial_state()[0]).powi(2) + (end[1] - u.initial_state()[1]).powi(2)).sqrt()
    };
    assert!(residual(1e-2) / residual(1e-3) >= 50.0);
}

#[test]
fn kernel_certificates_on_secondary_orbits() {
    for b12 in [0.0, 0.25, 1.0] {
        let m = LotkaVolterraMalthus::new(season_bifurc::LVMalthusParams::reference().with_beta12(b12).unwrap());
        let s = SeasonSchedule::sharp(0.6).unwrap();
        let orbit = find_equilibrium(&m, &s, &[1.0, 0.0], &SolverConfig::default()).unwrap();
        let r = monodromy_report(&m, &orbit, UNIT_MULTIPLIER_TOL).unwrap();
        assert_eq!(r.unit_multiplier_count, 1, "b12 = {b12}");
        let id = DMatrix::<f64>::identity(2, 2);
        let p0 = r.phi0.as_ref().unwrap();
        let pr = r.phi_r.as_ref().unwrap();
        assert!(((&id - &r.monodromy) * p0).norm() <= 10.0 * r.tol * p0.norm());
        assert!(((&id - r.monodromy.transpose()) * pr).norm() <= 10.0 * r.tol * pr.norm());
        assert!((pr - DVector::from_vec(vec![0.0, 1.0])).norm() < 1e-10);
        if b12 == 0.0 {
            assert!((p0 - DVector::from_vec(vec![0.0, 1.0])).norm() < 1e-10);
        } else {
            assert!(p0[0].abs() > 1e-3);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernel_vectors_certify_random_unit_monodromies(a in 0.05f64..0.95, c in -2.0f64..2.0, flip in proptest::bool::ANY) {
        let g = if flip {
            DMatrix::from_row_slice(2, 2, &[1.0, c, 0.0, a])
        } else {
            DMatrix::from_row_slice(2, 2, &[a, 0.0, c, 1.0])
        };
        let r = report_from_monodromy(&g, UNIT_MULTIPLIER_TOL).unwrap();
        prop_assert_eq!(r.unit_multiplier_count, 1);
        let id = DMatrix::<f64>::identity(2, 2);
        let p0 = r.phi0.unwrap();
        let pr = r.phi_r.unwrap();
        prop_assert!(((&id - &g) * &p0).norm() <= 10.0 * 1e-6);
        prop_assert!(((&id - g.transpose()) * &pr).norm() <= 10.0 * 1e-6);
        prop_assert!((p0.norm() - 1.0).abs() < 1e-12 && (pr.norm() - 1.0).abs() < 1e-12);
        let first = p0.iter().find(|x| x.abs() > 1e-12).unwrap();
        prop_assert!(*first > 0.0);
    }
}
