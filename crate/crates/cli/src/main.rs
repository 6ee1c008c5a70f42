use std::io::Write;

fn main() {
    let (stdout, stderr, code) = cylfi_cli::run_from_args(std::env::args_os());
    if !stdout.is_empty() {
        let mut out = std::io::stdout().lock();
        // a closed pipe is not worth a panic
        let _ = out.write_all(stdout.as_bytes()).and_then(|()| out.flush());
    }
    if !stderr.is_empty() {
        let _ = std::io::stderr().write_all(stderr.as_bytes());
    }
    std::process::exit(code);
}
