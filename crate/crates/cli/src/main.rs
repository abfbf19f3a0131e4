mod args;
mod commands;
mod config;
mod error;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Params { prime, g1, g2, g3 } => commands::params(prime, [g1, g2, g3]),
        Command::Demo { seed } => commands::demo(*seed),
        Command::Exchange { group, seed } => commands::exchange(group, *seed),
        Command::Encrypt {
            input,
            out,
            peer_public,
            secret,
            group,
            layout,
            offsets,
            seed,
        } => commands::encrypt_file(input, out, peer_public, *secret, group, layout, *offsets, *seed),
        Command::Decrypt {
            input,
            out,
            secret,
            offsets,
        } => commands::decrypt_file(input, out, *secret, *offsets),
        Command::Analyze {
            kind,
            group,
            shape,
            offsets,
            trials,
            seed,
        } => commands::analyze(*kind, group, shape.as_deref(), *offsets, *trials, *seed),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
