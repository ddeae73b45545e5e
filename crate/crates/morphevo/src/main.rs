use std::io;
use std::panic;
use std::process::ExitCode;

fn main() -> ExitCode {
    let code = panic::catch_unwind(|| {
        let mut stdout = io::stdout().lock();
        let mut stderr = io::stderr().lock();
        morphevo::cli::run(std::env::args_os(), &mut stdout, &mut stderr)
    })
    .unwrap_or(2);
    ExitCode::from(code as u8)
}
