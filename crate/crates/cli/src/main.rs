mod args;
mod commands;
mod config;
mod error;
mod output;

use std::ffi::OsString;
use std::io::Write;
use std::process::ExitCode;

use clap::{CommandFactory, Parser};

use args::Cli;
use error::CliError;
use output::Output;

fn parse(argv: Vec<OsString>) -> Result<Cli, CliError> {
    let argv = match config::config_path(&argv) {
        Some(path) => {
            let flags = config::config_flags(path.as_ref())?;
            let names: Vec<String> = Cli::command()
                .get_subcommands()
                .map(|c| c.get_name().to_string())
                .collect();
            let names: Vec<&str> = names.iter().map(String::as_str).collect();
            config::merge(argv, flags, &names)
        }
        None => argv,
    };
    Cli::try_parse_from(argv).map_err(|e| {
        if e.use_stderr() {
            CliError::User(e.render().to_string())
        } else {
            // --help and --version.
            print!("{}", e.render());
            std::process::exit(0);
        }
    })
}

fn run(argv: Vec<OsString>) -> Result<(), CliError> {
    let invocation: Vec<String> = std::iter::once("hpi".to_string())
        .chain(argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()))
        .collect();
    let cli = parse(argv)?;
    commands::validate_paths(&cli.command)?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::User("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let mut out = Output::new(&cli.out, invocation)?;
    let summary = commands::run(&cli.command, &mut out)?;
    let mut stdout = std::io::stdout().lock();
    for line in summary {
        // A closed pipe only loses the summary; the files are written.
        if writeln!(stdout, "{line}").is_err() {
            break;
        }
    }
    eprintln!(
        "{}: wrote {} file(s) to {}",
        cli.command.name(),
        out.written().len(),
        cli.out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let text = e.to_string();
            eprint!("error: {}", text.strip_prefix("error: ").unwrap_or(&text));
            if !text.ends_with('\n') {
                eprintln!();
            }
            ExitCode::from(e.exit_code())
        }
    }
}
