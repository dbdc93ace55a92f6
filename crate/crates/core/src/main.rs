fn main() {
    std::process::exit(mdfrule::cli::main_with_args(std::env::args_os()));
}
