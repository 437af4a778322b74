use std::process::ExitCode;

fn main() -> ExitCode {
    uplink_meta::cli::main_with_args(std::env::args_os())
}
