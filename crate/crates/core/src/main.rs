fn main() -> std::process::ExitCode {
    strapsim::cli::main_with_args(std::env::args_os())
}
