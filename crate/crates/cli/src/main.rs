fn main() -> std::process::ExitCode {
    sumlab_cli::main_with(std::env::args_os())
}
