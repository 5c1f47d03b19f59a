fn main() {
    std::process::exit(polar_vlsi::cli::main_with_args(std::env::args_os()));
}
