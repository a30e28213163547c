use armark_cli::{exit, parse_args, run};
use std::process::ExitCode;

fn main() -> ExitCode {
    let cmd = match parse_args(std::env::args_os()) {
        Ok(cmd) => cmd,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                exit::USAGE
            } else {
                exit::OK
            });
        }
    };
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    ExitCode::from(run(cmd, &mut stdout.lock(), &mut stderr.lock()))
}
