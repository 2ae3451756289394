use std::process::ExitCode;

fn main() -> ExitCode {
    cfsec::cli::main()
}
