fn main() {
    std::process::exit(lfmimo::cli::main_with_args(std::env::args_os()));
}
