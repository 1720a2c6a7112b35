use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tml_cli::session::{commands, run_script, Format, Session};

#[derive(Parser)]
#[command(name = "tml", version, about = "Tracing interpreter with provenance extraction and slicing")]
struct Cli {
    /// Evaluation step budget for each command.
    #[arg(long, env = "TML_FUEL", default_value_t = tml_core::eval::DEFAULT_FUEL)]
    fuel: u64,
    /// Run the commands in FILE and print the transcript.
    #[arg(long)]
    script: Option<PathBuf>,
    /// Continue a script after a failing command.
    #[arg(long)]
    keep_going: bool,
    /// How traces and slices are printed.
    #[arg(long, value_enum, default_value_t = Format::Pretty)]
    format: Format,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a security property described by a TOML file.
    Check { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut session = Session::new(cli.fuel);
    session.format = cli.format;

    if let Some(Command::Check { file }) = &cli.command {
        let result = std::fs::read_to_string(file)
            .map_err(|e| format!("{}: {e}", file.display()))
            .and_then(|src| tml_cli::check::run_str(&src, cli.fuel).map_err(|e| e.to_string()));
        return match result {
            Ok(out) => {
                println!("{out}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        };
    }

    if let Some(path) = &cli.script {
        let src = match std::fs::read_to_string(path) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        };
        let (transcript, ok) = run_script(&mut session, &src, cli.keep_going);
        print!("{transcript}");
        return if ok || cli.keep_going { ExitCode::SUCCESS } else { ExitCode::FAILURE };
    }

    repl(&mut session)
}

fn repl(session: &mut Session) -> ExitCode {
    let stdin = std::io::stdin();
    let mut out = std::io::stdout();
    let mut pending = String::new();
    loop {
        let _ = write!(out, "{}", if pending.is_empty() { "- " } else { "  " });
        let _ = out.flush();
        let mut line = String::new();
        match stdin.lock().read_line(&mut line) {
            Ok(0) | Err(_) => break,
            Ok(_) => {}
        }
        pending.push_str(&line);
        let cmds = commands(&pending);
        let complete = pending.trim_start().starts_with(':') || pending.trim_end().ends_with(';');
        if cmds.is_empty() {
            pending.clear();
            continue;
        }
        if !complete {
            continue;
        }
        for cmd in cmds {
            match session.command(cmd.trim_end().trim_end_matches(';')) {
                Ok(s) if s.is_empty() => {}
                Ok(s) => println!("{s}"),
                Err(e) => println!("error: {e}"),
            }
        }
        pending.clear();
    }
    println!();
    ExitCode::SUCCESS
}
