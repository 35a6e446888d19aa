fn main() {
    std::process::exit(igakit::cli::run(std::env::args_os()));
}
