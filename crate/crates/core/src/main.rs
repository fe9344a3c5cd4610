fn main() {
    std::process::exit(idml::cli::main_with(std::env::args_os()));
}
