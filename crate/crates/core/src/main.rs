fn main() {
    std::process::exit(ncpgeom::cli::run(std::env::args_os()));
}
