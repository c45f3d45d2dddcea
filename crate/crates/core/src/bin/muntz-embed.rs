fn main() {
    std::process::exit(muntz_embed::cli::run(std::env::args_os()));
}
