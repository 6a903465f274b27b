use std::io::{self, IsTerminal};
use std::process::ExitCode;

use dataval::cli::{run, Io};

fn main() -> ExitCode {
    let stdin = io::stdin();
    let stdout = io::stdout();
    let styled = stdout.is_terminal() && std::env::var_os("DV_NO_COLOR").is_none();
    let mut stdin = stdin.lock();
    let mut stdout = io::BufWriter::new(stdout.lock());
    let mut stderr = io::stderr().lock();
    let code = run(
        std::env::args_os(),
        &mut Io {
            stdin: &mut stdin,
            stdout: &mut stdout,
            stderr: &mut stderr,
            styled,
        },
    );
    use io::Write;
    let _ = stdout.flush();
    ExitCode::from(code as u8)
}
