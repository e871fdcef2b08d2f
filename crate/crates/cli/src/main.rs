fn main() {
    std::process::exit(talbot_cli::execute(std::env::args_os()));
}
