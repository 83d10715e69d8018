use std::io::Write;

fn main() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = zeeman_cep::cli::run_command(std::env::args_os(), &mut out, &mut err);
    let _ = std::io::stdout().write_all(&out);
    let _ = std::io::stderr().write_all(&err);
    std::process::exit(code);
}
