use season_bifurc::equilibrium::find_equilibrium;
use season_bifurc::integrator::integrate_variational;
use season_bifurc::oracles::{
    coexistence_equilibrium, nondiagonal_fundamental_closed_form, scalar_equilibrium_closed_form,
    trivial_floquet_closed_form,
};
use season_bifurc::validation::run_oracle_suite;
use season_bifurc::{LVMalthusParams, LotkaVolterraMalthus, SeasonSchedule, SolverConfig};

#[test]
fn coupled_fundamental_matrix_matches_closed_form() {
    let p = LVMalthusParams::reference().with_beta12(0.25).unwrap();
    let m = LotkaVolterraMalthus::new(p);
    let s = SeasonSchedule::sharp(0.5).unwrap();
    let orbit = find_equilibrium(&m, &s, &[1.0, 0.0], &SolverConfig::default()).unwrap();
    let exact = nondiagonal_fundamental_closed_form(&p, &orbit).unwrap();
    let numeric = integrate_variational(&m, &orbit).unwrap();
    for k in (0..orbit.nodes()).step_by(211) {
        assert!((&exact.matrices[k] - &numeric.matrices[k]).abs().max() < 1e-5);
    }
    assert!(exact.monodromy()[(0, 1)].abs() > 1e-3);
}

#[test]
fn closed_form_requires_single_species_orbit() {
    let p = LVMalthusParams::reference();
    let m = LotkaVolterraMalthus::new(p);
    let s = SeasonSchedule::sharp(0.8).unwrap();
    let cfg = SolverConfig { dt: 1e-3, tol: 1e-10, max_periods: 5000 };
    let orbit = find_equilibrium(&m, &s, &[1.0, 0.25], &cfg).unwrap();
    assert!(nondiagonal_fundamental_closed_form(&p, &orbit).is_err());
}

#[test]
fn scalar_closed_form_is_periodic_and_positive() {
    let sol = scalar_equilibrium_closed_form(2.0, 1.0, 1.0, 0.7).unwrap();
    assert!(sol.v0 > 0.0);
    assert!((sol.value_at(0.0) - sol.value_at(1.0)).abs() < 1e-14);
    assert!((sol.value_at(0.7) - sol.v0).abs() > 0.1);
    let extinct = scalar_equilibrium_closed_form(2.0, 1.0, 1.0, 0.3).unwrap();
    assert_eq!(extinct.v0, 0.0);
    assert_eq!(extinct.growth_integral(), 0.0);
}

#[test]
fn reference_closed_forms() {
    let p = LVMalthusParams::reference();
    let c = coexistence_equilibrium(&p);
    assert!((c[0] - 2.0).abs() < 1e-15 && (c[1] - 0.5).abs() < 1e-15);
    let mult = trivial_floquet_closed_form(&p, &SeasonSchedule::sharp(1.0 / 3.0).unwrap());
    assert!((mult[0] - 1.0).abs() < 1e-15);
    assert!((mult[1] - (-1.0f64 / 3.0).exp()).abs() < 1e-15);
}

#[test]
fn oracle_suite_passes_on_a_few_draws() {
    let report = run_oracle_suite(&LVMalthusParams::reference(), 3, 5, 0.1 / 365.0);
    assert!(report.passed(), "{report}");
    assert!(report.checks.len() >= 4 * 7);
}
