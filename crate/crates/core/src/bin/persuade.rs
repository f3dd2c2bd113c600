fn main() {
    std::process::exit(persuasion::cli::main_with_args(std::env::args_os()));
}
