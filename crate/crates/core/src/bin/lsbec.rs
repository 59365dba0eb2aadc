use std::process::ExitCode;

use lsbec::cli::{parse_config, run, ConfigError};

fn main() -> ExitCode {
    let config = match parse_config(std::env::args_os()) {
        Ok(c) => c,
        Err(ConfigError::Usage(e)) => e.exit(),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    ExitCode::from(run(&config) as u8)
}
