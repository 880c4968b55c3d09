fn main() {
    std::process::exit(hitwalk::cli::dispatch(std::env::args_os()));
}
