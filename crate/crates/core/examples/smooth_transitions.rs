//! Equilibria with mollified transitions approach the sharp one as the
//! kernel width shrinks.

use season_bifurc::bifurcation::primary_critical;
use season_bifurc::equilibrium::find_equilibrium;
use season_bifurc::{KernelSpec, LotkaVolterraMalthus, SeasonSchedule, SolverConfig};

fn main() -> season_bifurc::Result<()> {
    let model = LotkaVolterraMalthus::reference();
    let config = SolverConfig::default();
    let tau = 0.45;
    let sharp = find_equilibrium(&model, &SeasonSchedule::sharp(tau)?, &model.half_coexistence(), &config)?;
    for eps in [0.2, 0.1, 0.05, 0.025, 0.0125] {
        let schedule = SeasonSchedule::mollified(tau, eps)?;
        let orbit = find_equilibrium(&model, &schedule, &model.half_coexistence(), &config)?;
        let critical = primary_critical(model.params(), &KernelSpec::new(eps)?)?;
        println!(
            "eps = {eps:<7} max |u_eps - u_0| = {:.3e}   tau*_eps = {:.8}",
            sharp.max_distance(&orbit),
            critical.tau_value
        );
    }
    Ok(())
}
