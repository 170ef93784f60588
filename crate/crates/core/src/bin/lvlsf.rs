fn main() {
    std::process::exit(lvlsf::cli::main_with(std::env::args_os()));
}
