fn main() {
    std::process::exit(gsqg_patch::cli::main_with_args(std::env::args_os()));
}
