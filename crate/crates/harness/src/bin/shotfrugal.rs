use std::process::ExitCode;

fn main() -> ExitCode {
    shotfrugal::cli::main(std::env::args_os())
}
