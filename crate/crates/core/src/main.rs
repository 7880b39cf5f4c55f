use std::process::ExitCode;

fn main() -> ExitCode {
    parasteady::cli::main()
}
