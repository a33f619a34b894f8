fn main() {
    std::process::exit(metrofold::cli::dispatch(std::env::args_os()));
}
