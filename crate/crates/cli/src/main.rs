mod args;
mod output;
mod run;

use std::process::ExitCode;

use clap::Parser;
use hpot::Error;

use args::Cli;

/// 2 unsolvable, 3 bad input, 1 anything else.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Unsolvable(_) => 2,
        Error::Validation(_)
        | Error::Syntax { .. }
        | Error::UnknownIdentifier { .. }
        | Error::Arity { .. }
        | Error::Unsupported(_)
        | Error::Invalid(_)
        | Error::Domain(_)
        | Error::DimensionMismatch { .. }
        | Error::NonFinite => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // help and version go to stdout and are not failures
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run::run(&cli.command) {
        Ok(done) => {
            println!("{}", done.summary);
            ExitCode::from(done.code)
        }
        Err(e) => {
            eprintln!("hpot: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
