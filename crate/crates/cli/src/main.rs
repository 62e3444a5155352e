mod commands;
mod format;

use std::process::ExitCode;

fn main() -> ExitCode {
    commands::main()
}
