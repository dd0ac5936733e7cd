fn main() {
    std::process::exit(boundary_lab_cli::run(std::env::args_os()));
}
