use std::process::ExitCode;

fn main() -> ExitCode {
    reins_cli::app::main_with_args(std::env::args_os())
}
