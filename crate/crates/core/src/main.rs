use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use evasion::cli::{self, Cli, Command};

fn input_of(cli: &Cli) -> String {
    let p = match &cli.command {
        Command::Check(a) => &a.scene,
        Command::Lp(a) => &a.sheaf,
        Command::Sheaf { scene } | Command::Path { scene } => scene,
        Command::Matrix { input, .. } => input,
        Command::Oracle { sheaf, .. } => sheaf,
    };
    p.display().to_string()
}

fn try_main(cli: &Cli) -> anyhow::Result<i32> {
    let stdout = std::io::stdout();
    let code = cli::run(cli, &mut stdout.lock()).with_context(|| input_of(cli))?;
    Ok(code)
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    let pipe = |io: &std::io::Error| io.kind() == std::io::ErrorKind::BrokenPipe;
    e.chain().any(|c| match c.downcast_ref::<evasion::Error>() {
        Some(evasion::Error::Io(io)) => pipe(io),
        _ => c.downcast_ref::<std::io::Error>().is_some_and(pipe),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match try_main(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) if is_broken_pipe(&e) => ExitCode::from(cli::EXIT_ERROR as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(cli::EXIT_ERROR as u8)
        }
    }
}
