fn main() {
    std::process::exit(mlsmoke::cli::run(std::env::args_os()));
}
