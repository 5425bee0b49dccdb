//! Periodic equilibrium of the reference two-species system and its
//! monodromy report. Writes the orbit as CSV to stdout when given `--csv`.

use season_bifurc::equilibrium::{find_equilibrium, l2_norm_component};
use season_bifurc::linearization::{monodromy_report, UNIT_MULTIPLIER_TOL};
use season_bifurc::{LotkaVolterraMalthus, SeasonSchedule, SolverConfig};

fn main() -> season_bifurc::Result<()> {
    let tau: f64 = std::env::args()
        .skip(1)
        .find_map(|a| a.parse().ok())
        .unwrap_or(0.7);
    let model = LotkaVolterraMalthus::reference();
    let schedule = SeasonSchedule::sharp(tau)?;
    let orbit = find_equilibrium(&model, &schedule, &model.half_coexistence(), &SolverConfig::default())?;
    if std::env::args().any(|a| a == "--csv") {
        orbit.write_csv(std::io::stdout().lock(), &[format!("tau = {tau}")])?;
        return Ok(());
    }
    println!(
        "tau = {tau}: {} periods, converged = {}, residual = {:.2e}",
        orbit.iterations, orbit.converged, orbit.residual
    );
    println!(
        "u(0) = {:?}, |u_1| = {:.6}, |u_2| = {:.6}",
        orbit.initial_state(),
        l2_norm_component(&orbit, 0)?,
        l2_norm_component(&orbit, 1)?
    );
    let report = monodromy_report(&model, &orbit, UNIT_MULTIPLIER_TOL)?;
    print!("{}", report.summary());
    Ok(())
}
