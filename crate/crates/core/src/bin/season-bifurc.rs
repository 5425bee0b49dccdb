fn main() {
    std::process::exit(season_bifurc::cli::main_with_args(std::env::args_os()));
}
