fn main() {
    std::process::exit(hardcore_lab::cli::main_with_args(std::env::args_os()));
}
