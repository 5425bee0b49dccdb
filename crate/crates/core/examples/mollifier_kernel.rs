//! The bump kernel, the smoothed season indicators and `r_eps`.

use season_bifurc::mollifier::{profile, season_indicators_by_quadrature};
use season_bifurc::{KernelSpec, SeasonSchedule};

fn main() -> season_bifurc::Result<()> {
    println!("rho(0) = {:.6}, rho(0.49) = {:.3e}, rho(0.5) = {}", profile(0.0), profile(0.49), profile(0.5));

    let schedule = SeasonSchedule::mollified(0.4, 0.1)?;
    println!("\n{:>6} {:>10} {:>10} {:>10}", "t", "chi_g", "chi_d", "quadrature");
    for t in [0.0, 0.03, 0.05, 0.2, 0.37, 0.4, 0.43, 0.7, 0.97, 1.0] {
        let (g, d) = schedule.indicators(t);
        let (gq, _) = season_indicators_by_quadrature(&schedule, t, 64)?;
        println!("{t:>6.2} {g:>10.6} {d:>10.6} {gq:>10.6}");
    }

    println!("\nr_eps(x) for eps = 0.1 (sharp limit is the identity):");
    let k = KernelSpec::new(0.1)?;
    for x in [0.02, 0.05, 0.25, 0.5, 0.95, 1.0] {
        println!("  r_eps({x}) = {:.8}", season_bifurc::mollifier::r_eps(&k, x));
    }
    Ok(())
}
