use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use onshell_cli::args::Cli;
use onshell_cli::commands::{run, CliError};

fn emit(text: &str, to_stderr: bool) {
    let mut line = text.to_string();
    if !line.ends_with('\n') {
        line.push('\n');
    }
    let _ = if to_stderr {
        std::io::stderr().write_all(line.as_bytes())
    } else {
        std::io::stdout().write_all(line.as_bytes())
    };
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let as_text = cli.output.text;
    match run(&cli.command) {
        Ok(out) => {
            if as_text {
                emit(&out.text, false);
            } else {
                let mut value = out.value;
                value["ok"] = serde_json::Value::Bool(true);
                value["command"] = cli.command.name().into();
                emit(
                    &serde_json::to_string_pretty(&value).expect("serializable"),
                    false,
                );
            }
            ExitCode::from(if out.negative { 2 } else { 0 })
        }
        Err(e) => report(e, as_text),
    }
}

fn report(e: CliError, as_text: bool) -> ExitCode {
    if e.exit == 2 && !as_text {
        emit(
            &serde_json::to_string_pretty(&e.to_json()).expect("serializable"),
            false,
        );
    } else {
        emit(&format!("error[{}]: {}", e.code, e.message), true);
    }
    ExitCode::from(e.exit)
}
