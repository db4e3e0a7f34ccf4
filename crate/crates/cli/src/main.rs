use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use permix_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match permix_cli::run(&cli) {
        Ok(out) => {
            if cli.common.output_path.is_none() {
                let mut stdout = std::io::stdout().lock();
                if stdout
                    .write_all(out.rendered.as_bytes())
                    .and_then(|_| stdout.flush())
                    .is_err()
                {
                    return ExitCode::FAILURE;
                }
            }
            eprintln!("runtime: {:.3} s", out.elapsed.as_secs_f64());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
