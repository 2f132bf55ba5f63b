use std::process::ExitCode;

fn main() -> ExitCode {
    drules::cli::main()
}
