use clap::Parser;

fn main() -> std::process::ExitCode {
    nelson_cli::main_with(nelson_cli::Cli::parse())
}
