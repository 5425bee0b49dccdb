//! The oracle suite behind the `validate` command.

use season_bifurc::validation::{run_oracle_suite, DEFAULT_DRAWS, DEFAULT_SEED};
use season_bifurc::{LVMalthusParams, SolverConfig};

fn main() {
    let report = run_oracle_suite(&LVMalthusParams::reference(), DEFAULT_DRAWS, DEFAULT_SEED, SolverConfig::default().dt);
    println!("{report}");
    if !report.passed() {
        std::process::exit(1);
    }
}
