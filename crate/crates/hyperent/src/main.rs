fn main() {
    std::process::exit(hyperent::cli::run(std::env::args_os()));
}
