//! Secondary critical value: closed form, root finding along the
//! single-species branch, condition (d) and the branch approximation, for a
//! diagonal and a non-diagonal competition matrix.

use season_bifurc::bifurcation::{
    growth_integral_u, secondary_branch_approx, secondary_condition_d, secondary_tau_analytic,
    secondary_tau_root_find,
};
use season_bifurc::equilibrium::find_equilibrium;
use season_bifurc::integrator::integrate_variational;
use season_bifurc::linearization::{monodromy_report, UNIT_MULTIPLIER_TOL};
use season_bifurc::{KernelSpec, LVMalthusParams, LotkaVolterraMalthus, SeasonSchedule, SolverConfig};

fn main() -> season_bifurc::Result<()> {
    let config = SolverConfig::default();
    for beta12 in [0.0, 1.0] {
        let params = LVMalthusParams::reference().with_beta12(beta12)?;
        let model = LotkaVolterraMalthus::new(params);
        let analytic = secondary_tau_analytic(&params)?;
        let root = secondary_tau_root_find(&params, &KernelSpec::sharp(), &config, 1e-9)?;
        println!("beta12 = {beta12}: tau** = {} (closed form), {:.9} (root find)", analytic.tau_value, root.tau_value);

        let schedule = SeasonSchedule::sharp(analytic.tau_value)?;
        let orbit = find_equilibrium(&model, &schedule, &[1.0, 0.0], &config)?;
        println!("  U = {:.8}", growth_integral_u(&orbit));
        let report = monodromy_report(&model, &orbit, UNIT_MULTIPLIER_TOL)?;
        print!("{}", report.summary());
        let d = secondary_condition_d(&model, &orbit, &report, &config, 2.0 / 365.0)?;
        println!("  condition (d) = {:.6} (numerical estimate)", d.value);

        let path = integrate_variational(&model, &orbit)?;
        let branch = secondary_branch_approx(&orbit, &report, &path, 0.05)?;
        let k = orbit.mesh().switch_node().unwrap_or(0);
        println!(
            "  sigma = 0.05 correction at t = tau: ({:.6}, {:.6})",
            branch.state(k)[0] - orbit.state(k)[0],
            branch.state(k)[1] - orbit.state(k)[1]
        );
    }
    Ok(())
}
