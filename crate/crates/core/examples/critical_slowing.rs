//! Iterations needed to reach the equilibrium as the season length
//! approaches the primary critical value.

use season_bifurc::equilibrium::find_equilibrium;
use season_bifurc::{LotkaVolterraMalthus, SeasonSchedule, SolverConfig};

fn main() -> season_bifurc::Result<()> {
    let model = LotkaVolterraMalthus::reference();
    let config = SolverConfig::default();
    for n in [85, 110, 118, 121, 122, 123, 126, 134, 158] {
        let tau = n as f64 / 365.0;
        let orbit = find_equilibrium(&model, &SeasonSchedule::sharp(tau)?, &model.half_coexistence(), &config)?;
        println!(
            "tau = {n}/365 = {tau:.5}: {:>6} periods, converged = {}",
            orbit.iterations, orbit.converged
        );
    }
    Ok(())
}
