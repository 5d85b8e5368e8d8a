fn main() {
    std::process::exit(wepolicy::cli::main_with_args(std::env::args_os()));
}
