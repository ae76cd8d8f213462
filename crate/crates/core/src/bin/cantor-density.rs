fn main() {
    let (code, out) = cantor_density::cli::run_command(std::env::args_os());
    if !out.is_empty() {
        if code == 0 {
            println!("{out}");
        } else {
            eprintln!("{out}");
        }
    }
    std::process::exit(code);
}
