use std::io;
use std::panic;
use std::process::ExitCode;

fn main() -> ExitCode {
    let code = panic::catch_unwind(|| {
        let mut out = io::stdout().lock();
        let mut err = io::stderr().lock();
        evcheck_cli::run(std::env::args_os(), &mut out, &mut err)
    })
    .unwrap_or(evcheck_cli::EXIT_INTERNAL);
    ExitCode::from(code as u8)
}
