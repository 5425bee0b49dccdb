//! Command-line front end.
//!
//! ```text
//! season-bifurc <simulate|equilibrium|sweep|critical|validate>
//!     [--config PATH] [--set section.key=value ...] [--out DIR] [--plot]
//! ```
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 validation failure. Failures also print a one-line JSON record on
//! stderr.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::bifurcation::{
    primary_critical, primary_tau, secondary_tau_analytic, secondary_tau_root_find, secondary_tau_scan,
    sweep_diagram_with, write_diagram_csv, CriticalParameter, DiagramRow,
};
use crate::config::{ConfigError, ModelKind, RunConfig};
use crate::equilibrium::{find_equilibrium, PeriodicOrbit};
use crate::error::Error;
use crate::integrator::integrate_horizon;
use crate::linearization::{monodromy_report, transversality};
use crate::plot::LineChart;
use crate::validation::run_oracle_suite;

#[derive(Debug, Parser)]
#[command(name = "season-bifurc", version, about = "Season-length bifurcations of seasonally switched ODE systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set schedule.tau=0.5`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also render SVG charts.
    #[arg(long, global = true)]
    pub plot: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Integrate the configured number of periods from the initial datum.
    Simulate,
    /// Periodic equilibrium at the configured season length, with its monodromy report.
    Equilibrium,
    /// Bifurcation diagram over the season-length mesh.
    Sweep,
    /// Primary and secondary critical season lengths, cross-checked.
    Critical,
    /// Oracle cross-check suite.
    Validate,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(#[from] Error),
    #[error("validation failure: {0}")]
    Validation(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
            CliError::Validation(_) => 4,
        }
    }

    /// One-line JSON error record.
    pub fn record(&self) -> String {
        let kind = match self {
            CliError::Config(_) => "config",
            CliError::Numerical(_) => "numerical",
            CliError::Validation(_) => "validation",
            CliError::Io(_) => "io",
        };
        let line = match self {
            CliError::Config(e) => e.line,
            _ => None,
        };
        serde_json::json!({
            "error": kind,
            "exit_code": self.exit_code(),
            "line": line,
            "message": self.to_string(),
        })
        .to_string()
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            eprintln!("{}", e.record());
            e.exit_code()
        }
    }
}

pub fn resolve_config(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::from_file(path, &cli.overrides)?,
        None => RunConfig::parse("", &cli.overrides)?,
    };
    if let Some(out) = &cli.out {
        config.output.dir = out.clone();
    }
    if cli.plot {
        config.output.plot = true;
    }
    Ok(config)
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let config = resolve_config(cli)?;
    fs::create_dir_all(&config.output.dir)?;
    execute_command(cli.command, &config)
}

pub fn execute_command(command: Command, config: &RunConfig) -> Result<(), CliError> {
    match command {
        Command::Simulate => simulate(config),
        Command::Equilibrium => equilibrium(config),
        Command::Sweep => sweep(config).map(|_| ()),
        Command::Critical => critical(config),
        Command::Validate => validate(config),
    }
}

fn header(config: &RunConfig, command: &str) -> Vec<String> {
    let mut lines = vec![format!("season-bifurc {} {command}", env!("CARGO_PKG_VERSION"))];
    lines.extend(config.echo_lines());
    lines
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_svg(path: &Path, chart: &LineChart) -> Result<(), CliError> {
    fs::write(path, chart.render())?;
    println!("wrote {}", path.display());
    Ok(())
}

fn simulate(config: &RunConfig) -> Result<(), CliError> {
    let model = config.model()?;
    let schedule = config.season()?;
    let tr = integrate_horizon(
        model.as_model(),
        &schedule,
        &config.initial_state(),
        config.simulate.periods,
        config.solver.dt,
    )?;
    let path = config.output.dir.join("trajectory.csv");
    let mut w = create(&path)?;
    tr.write_csv(&mut w, &header(config, "simulate"))?;
    w.flush()?;
    println!("wrote {}", path.display());
    if config.output.plot {
        let mut chart = LineChart::new("trajectory", "t", "u");
        for i in 0..tr.dim() {
            let pts = tr.times().iter().copied().zip(tr.component(i)).collect();
            chart = chart.with_series(format!("u_{}", i + 1), pts);
        }
        write_svg(&config.output.dir.join("trajectory.svg"), &chart)?;
    }
    Ok(())
}

fn equilibrium(config: &RunConfig) -> Result<(), CliError> {
    let model = config.model()?;
    let model = model.as_model();
    let schedule = config.season()?;
    let orbit = find_equilibrium(model, &schedule, &config.initial_state(), &config.solver_config())?;
    let path = config.output.dir.join("equilibrium.csv");
    let mut w = create(&path)?;
    orbit.write_csv(&mut w, &header(config, "equilibrium"))?;
    w.flush()?;
    println!("wrote {}", path.display());

    let report = monodromy_report(model, &orbit, config.linearization.unit_tol)?;
    let mut text = format!(
        "tau = {}\nepsilon = {}\niterations = {}\nconverged = {}\nresidual = {:e}\n",
        schedule.tau(),
        schedule.epsilon(),
        orbit.iterations,
        orbit.converged,
        orbit.residual
    );
    text += &report.summary();
    if report.unit_multiplier_count == 1 {
        let t = transversality(model, &report, &orbit)?;
        text += &format!("transversality = {}\n", t.value);
        if !t.is_conclusive() {
            text += "transversality_note = inconclusive\n";
        }
    }
    print!("{text}");
    let path = config.output.dir.join("monodromy.txt");
    fs::write(&path, &text)?;
    println!("wrote {}", path.display());
    if !orbit.converged {
        eprintln!(
            "warning: not converged after {} periods (residual {:e})",
            orbit.iterations, orbit.residual
        );
    }
    if config.output.plot {
        let mut chart = LineChart::new("periodic equilibrium", "t", "u");
        for i in 0..orbit.dim() {
            let pts = orbit.times().iter().copied().zip(orbit.component(i)).collect();
            chart = chart.with_series(format!("u_{}", i + 1), pts);
        }
        write_svg(&config.output.dir.join("equilibrium.svg"), &chart)?;
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct CheckpointEntry {
    index: usize,
    row: DiagramRow,
}

fn load_checkpoint(path: &Path, key: &str) -> BTreeMap<usize, DiagramRow> {
    let mut rows = BTreeMap::new();
    let Ok(file) = File::open(path) else {
        return rows;
    };
    let mut lines = BufReader::new(file).lines();
    match lines.next() {
        Some(Ok(first)) if first == key => {}
        _ => return rows,
    }
    for line in lines.map_while(|l| l.ok()) {
        // a torn final line from an interrupted run is skipped
        if let Ok(e) = serde_json::from_str::<CheckpointEntry>(&line) {
            rows.insert(e.index, e.row);
        }
    }
    rows
}

/// Runs (or resumes) the configured sweep and writes `diagram.csv`.
pub fn sweep(config: &RunConfig) -> Result<Vec<DiagramRow>, CliError> {
    let model = config.model()?;
    let kernel = config.kernel()?;
    let mesh = config.tau_mesh();
    let workers = config.workers()?;
    let dir = &config.output.dir;
    let checkpoint = dir.join("diagram.checkpoint.jsonl");
    let key = serde_json::to_string(&config.echo_lines()).expect("strings serialize");

    let mut done = if config.sweep.checkpoint {
        load_checkpoint(&checkpoint, &key)
    } else {
        BTreeMap::new()
    };
    done.retain(|&k, r| k < mesh.len() && r.tau == mesh[k] && r.error.is_none());
    let pending: Vec<usize> = (0..mesh.len()).filter(|k| !done.contains_key(k)).collect();
    if !done.is_empty() {
        println!("resuming: {} of {} rows from checkpoint", done.len(), mesh.len());
    }
    if !pending.is_empty() {
        let sink = if config.sweep.checkpoint {
            let mut f = BufWriter::new(File::create(&checkpoint)?);
            writeln!(f, "{key}")?;
            for (&index, row) in &done {
                let entry = CheckpointEntry { index, row: row.clone() };
                writeln!(f, "{}", serde_json::to_string(&entry).expect("row serializes"))?;
            }
            f.flush()?;
            Some(Mutex::new(f))
        } else {
            None
        };
        let taus: Vec<f64> = pending.iter().map(|&k| mesh[k]).collect();
        let fresh = sweep_diagram_with(
            model.as_model(),
            &kernel,
            &taus,
            &config.initial_state(),
            &config.solver_config(),
            workers,
            |j, row| {
                if let (Some(sink), None) = (&sink, &row.error) {
                    let entry = CheckpointEntry {
                        index: pending[j],
                        row: row.clone(),
                    };
                    let mut f = sink.lock().expect("checkpoint writer");
                    let _ = writeln!(f, "{}", serde_json::to_string(&entry).expect("row serializes"));
                    let _ = f.flush();
                }
            },
        )?;
        for (j, row) in fresh.into_iter().enumerate() {
            done.insert(pending[j], row);
        }
    }
    let rows: Vec<DiagramRow> = done.into_values().collect();

    let path = dir.join("diagram.csv");
    let mut comments = header(config, "sweep");
    for r in rows.iter().filter(|r| r.error.is_some()) {
        comments.push(format!("failed tau = {}: {}", r.tau, r.error.as_deref().unwrap_or("")));
    }
    let mut w = create(&path)?;
    write_diagram_csv(&mut w, &rows, &comments)?;
    w.flush()?;
    if config.sweep.checkpoint && checkpoint.exists() {
        fs::remove_file(&checkpoint)?;
    }
    println!("wrote {}", path.display());
    let unconverged = rows.iter().filter(|r| !r.converged).count();
    if unconverged > 0 {
        println!("{unconverged} rows did not reach tol within max_periods");
    }
    if config.output.plot {
        let mut chart = LineChart::new("bifurcation diagram", "tau", "L2 norm");
        for i in 0..config.dimension() {
            let pts = rows.iter().map(|r| (r.tau, r.norms[i])).collect();
            chart = chart.with_series(format!("|u_{}|", i + 1), pts);
        }
        if config.model.kind == ModelKind::LotkaVolterra {
            let params = config.lv_params()?;
            if let Ok(p) = primary_critical(&params, &kernel) {
                chart = chart.with_marker(p.tau_value, "tau*");
            }
            let secondary = if kernel.is_sharp() {
                secondary_tau_analytic(&params).ok()
            } else {
                secondary_tau_scan(&params, &kernel, &rows, config.linearization.scan_bound).ok()
            };
            if let Some(s) = secondary {
                chart = chart.with_marker(s.tau_value, "tau**");
            }
        }
        write_svg(&dir.join("diagram.svg"), &chart)?;
    }
    Ok(rows)
}

fn critical(config: &RunConfig) -> Result<(), CliError> {
    if config.model.kind != ModelKind::LotkaVolterra {
        return Err(ConfigError {
            line: None,
            key: Some("model.kind".into()),
            message: "critical needs the two-species model".into(),
        }
        .into());
    }
    let params = config.lv_params()?;
    let kernel = config.kernel()?;
    let mut text = String::new();
    let mut section = |title: &str, c: &CriticalParameter| {
        text += &format!("[{title}]\n{c}\n\n");
    };
    let [p1, p2] = primary_tau(&params, &kernel)?;
    section("primary.species_1", &p1);
    section("primary.species_2", &p2);

    let zero = PeriodicOrbit::zero(
        crate::mollifier::SeasonSchedule::new(p1.tau_value.min(p2.tau_value), kernel)?,
        config.solver.dt,
        2,
    )?;
    let model = config.model()?;
    let report = monodromy_report(model.as_model(), &zero, config.linearization.unit_tol)?;
    let mut problems = Vec::new();
    if report.unit_multiplier_count != 1 {
        problems.push(format!(
            "trivial orbit at the primary value has {} unit multipliers",
            report.unit_multiplier_count
        ));
    }

    let mut secondary = Vec::new();
    if kernel.is_sharp() {
        secondary.push(secondary_tau_analytic(&params)?);
    }
    secondary.push(secondary_tau_root_find(&params, &kernel, &config.solver_config(), 1e-10)?);
    let rows = sweep(config)?;
    secondary.push(secondary_tau_scan(&params, &kernel, &rows, config.linearization.scan_bound)?);
    for (i, c) in secondary.iter().enumerate() {
        section(&format!("secondary.{}", i + 1), c);
    }
    let mesh = config.tau_mesh();
    let cell = mesh.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let scan = secondary.last().expect("scan present").tau_value;
    for c in &secondary[..secondary.len() - 1] {
        let gap = (c.tau_value - scan).abs();
        if gap > cell {
            problems.push(format!("secondary values disagree by {gap} (> mesh cell {cell})"));
        }
    }
    text += &format!(
        "[cross_check]\nprimary_unit_multipliers = {}\nmesh_cell = {cell}\nstatus = {}\n",
        report.unit_multiplier_count,
        if problems.is_empty() { "agree" } else { "DISAGREE" }
    );
    print!("{text}");
    let path = config.output.dir.join("critical.txt");
    fs::write(&path, &text)?;
    println!("wrote {}", path.display());
    if problems.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(problems.join("; ")))
    }
}

fn validate(config: &RunConfig) -> Result<(), CliError> {
    let params = config.lv_params()?;
    let report = run_oracle_suite(&params, config.validate.draws, config.validate.seed, config.solver.dt);
    let text = report.to_string();
    println!("{text}");
    fs::write(config.output.dir.join("validation.txt"), format!("{text}\n"))?;
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "{} oracle checks failed",
            report.failures().count()
        )))
    }
}
