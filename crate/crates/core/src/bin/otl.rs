fn main() {
    std::process::exit(otl::cli::main(std::env::args_os()));
}
