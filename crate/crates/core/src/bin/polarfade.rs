fn main() {
    std::process::exit(polarfade::cli::main_with_args(std::env::args_os()));
}
