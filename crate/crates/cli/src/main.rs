use std::process::ExitCode;

use recolour_cli::{parse_args, run};

fn main() -> ExitCode {
    let config = match parse_args(std::env::args_os()) {
        Ok(c) => c,
        Err(e) => {
            let msg = e.message().trim_end();
            if e.exit_code() == 0 {
                println!("{msg}");
            } else {
                eprintln!("{msg}");
            }
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let level = if config.verbose { "debug" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    ExitCode::from(run(&config) as u8)
}
