fn main() {
    std::process::exit(vascflow::cli::dispatch(std::env::args_os()));
}
