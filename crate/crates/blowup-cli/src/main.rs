fn main() {
    std::process::exit(blowup_cli::main_with(std::env::args_os()));
}
