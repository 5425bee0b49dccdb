//! Floquet multipliers of the extinction state against their closed form,
//! and the transversality value at the primary critical season length.

use season_bifurc::bifurcation::primary_critical;
use season_bifurc::integrator::integrate_variational;
use season_bifurc::linearization::{monodromy_report, transversality, UNIT_MULTIPLIER_TOL};
use season_bifurc::oracles::trivial_floquet_closed_form;
use season_bifurc::{KernelSpec, LotkaVolterraMalthus, PeriodicOrbit, SeasonSchedule, SolverConfig};

fn main() -> season_bifurc::Result<()> {
    let model = LotkaVolterraMalthus::reference();
    let dt = SolverConfig::default().dt;
    for eps in [0.0, 0.05] {
        println!("epsilon = {eps}");
        let kernel = KernelSpec::new(eps)?;
        for tau in [0.1, 0.2, 0.3, 0.4, 0.5, 0.6] {
            let schedule = SeasonSchedule::new(tau, kernel)?;
            let zero = PeriodicOrbit::zero(schedule, dt, 2)?;
            let g = integrate_variational(&model, &zero)?;
            let exact = trivial_floquet_closed_form(model.params(), &schedule);
            let m = g.monodromy();
            println!(
                "  tau = {tau:.1}: lambda = ({:.10}, {:.10}), closed form ({:.10}, {:.10})",
                m[(0, 0)],
                m[(1, 1)],
                exact[0],
                exact[1]
            );
        }
        let critical = primary_critical(model.params(), &kernel)?;
        let zero = PeriodicOrbit::zero(SeasonSchedule::new(critical.tau_value, kernel)?, dt, 2)?;
        let report = monodromy_report(&model, &zero, UNIT_MULTIPLIER_TOL)?;
        let t = transversality(&model, &report, &zero)?;
        println!(
            "  tau* = {:.10}: unit multipliers = {}, phi0 = {:?}, transversality = {:.6}",
            critical.tau_value,
            report.unit_multiplier_count,
            report.phi0.as_ref().map(|v| v.as_slice().to_vec()),
            t.value
        );
    }
    Ok(())
}
