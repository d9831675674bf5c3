fn main() {
    std::process::exit(h1flow::cli::main_with_args(std::env::args_os()));
}
