use std::ffi::OsString;

fn main() {
    let argv: Vec<OsString> = std::env::args_os().collect();
    if let Err(e) = splice_cli::run(argv) {
        eprintln!("splice: {e}");
        std::process::exit(e.exit_code());
    }
}
