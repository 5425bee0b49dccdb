//! Tangent approximation of the branch born at the primary critical value,
//! compared with equilibria computed slightly past it.

use season_bifurc::equilibrium::{find_equilibrium, period_map};
use season_bifurc::integrator::integrate_variational;
use season_bifurc::linearization::{branch_tangent, monodromy_report, UNIT_MULTIPLIER_TOL};
use season_bifurc::{LotkaVolterraMalthus, PeriodicOrbit, SeasonSchedule, SolverConfig};

fn main() -> season_bifurc::Result<()> {
    let model = LotkaVolterraMalthus::reference();
    let config = SolverConfig::default();
    let schedule = SeasonSchedule::sharp(1.0 / 3.0)?;
    let zero = PeriodicOrbit::zero(schedule, config.dt, 2)?;
    let path = integrate_variational(&model, &zero)?;
    let report = monodromy_report(&model, &zero, UNIT_MULTIPLIER_TOL)?;

    println!("one-period residual of u* + s Phi_0:");
    for s in [1e-1, 1e-2, 1e-3] {
        let approx = branch_tangent(&report, &zero, &path, s)?;
        let end = period_map(&model, &schedule, approx.initial_state(), config.dt)?;
        let res = ((end[0] - approx.initial_state()[0]).powi(2) + end[1].powi(2)).sqrt();
        println!("  s = {s:.0e}: {res:.3e}");
    }

    println!("\nbranch amplitude past tau*:");
    for n in [123, 125, 130, 140] {
        let tau = n as f64 / 365.0;
        let orbit = find_equilibrium(&model, &SeasonSchedule::sharp(tau)?, &model.half_coexistence(), &config)?;
        println!(
            "  tau = {n}/365: u_1(0) = {:.6}, u_2 max = {:.1e}, periods = {}",
            orbit.initial_state()[0],
            orbit.max_abs_component(1),
            orbit.iterations
        );
    }
    Ok(())
}
