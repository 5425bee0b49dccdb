//! Scalar logistic/Malthus system: numerical equilibrium against the
//! closed-form periodic orbit, across the extinction threshold.

use season_bifurc::bifurcation::growth_integral_u;
use season_bifurc::equilibrium::find_equilibrium;
use season_bifurc::oracles::scalar_equilibrium_closed_form;
use season_bifurc::{LogisticMalthus, LogisticMalthusParams, SeasonSchedule, SolverConfig};

fn main() -> season_bifurc::Result<()> {
    let (alpha, beta, mu) = (2.0, 1.0, 1.0);
    let model = LogisticMalthus::new(LogisticMalthusParams::new(alpha, beta, mu)?);
    let config = SolverConfig::default();
    println!("threshold mu/(alpha+mu) = {:.6}", mu / (alpha + mu));
    println!("{:>6} {:>12} {:>12} {:>10} {:>10} {:>8}", "tau", "v0 exact", "v0 numeric", "max err", "U err", "periods");
    for tau in [0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9] {
        let exact = scalar_equilibrium_closed_form(alpha, beta, mu, tau)?;
        let schedule = SeasonSchedule::sharp(tau)?;
        let orbit = find_equilibrium(&model, &schedule, &[0.5 * alpha / beta], &config)?;
        let err = orbit
            .times()
            .iter()
            .enumerate()
            .map(|(k, &t)| (orbit.state(k)[0] - exact.value_at(t)).abs())
            .fold(0.0, f64::max);
        let u_err = (growth_integral_u(&orbit) - exact.growth_integral()).abs();
        println!(
            "{tau:>6.2} {:>12.8} {:>12.8} {err:>10.2e} {u_err:>10.2e} {:>8}",
            exact.v0,
            orbit.initial_state()[0],
            orbit.iterations
        );
    }
    Ok(())
}
