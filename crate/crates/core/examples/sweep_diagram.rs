//! Coarse bifurcation diagram over the season length, written as CSV and SVG
//! into the directory given as first argument (default `target/diagram`).

use std::fs;
use std::path::PathBuf;

use season_bifurc::bifurcation::{
    primary_critical, secondary_tau_analytic, sweep_diagram, write_diagram_csv,
};
use season_bifurc::plot::LineChart;
use season_bifurc::{KernelSpec, LotkaVolterraMalthus, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| "target/diagram".into());
    fs::create_dir_all(&dir)?;
    let model = LotkaVolterraMalthus::reference();
    let kernel = KernelSpec::sharp();
    let config = SolverConfig {
        tol: 1e-10,
        max_periods: 20_000,
        ..SolverConfig::default()
    };
    let mesh: Vec<f64> = (1..60).map(|k| k as f64 / 60.0).collect();
    let rows = sweep_diagram(&model, &kernel, &mesh, &model.half_coexistence(), &config, 0)?;
    write_diagram_csv(fs::File::create(dir.join("diagram.csv"))?, &rows, &[])?;

    let tau1 = primary_critical(model.params(), &kernel)?.tau_value;
    let tau2 = secondary_tau_analytic(model.params())?.tau_value;
    let chart = LineChart::new("bifurcation diagram", "tau", "L2 norm")
        .with_series("|u_1|", rows.iter().map(|r| (r.tau, r.norms[0])).collect())
        .with_series("|u_2|", rows.iter().map(|r| (r.tau, r.norms[1])).collect())
        .with_marker(tau1, "tau*")
        .with_marker(tau2, "tau**");
    fs::write(dir.join("diagram.svg"), chart.render())?;
    for r in rows.iter().step_by(6) {
        println!("{:.4} {:.6} {:.6} {:>6}", r.tau, r.norms[0], r.norms[1], r.iterations);
    }
    println!("wrote {}", dir.display());
    Ok(())
}
