fn main() {
    std::process::exit(cora_sim::cli::main_with_args(std::env::args_os()));
}
