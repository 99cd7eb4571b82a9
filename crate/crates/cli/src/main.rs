use std::io;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("RICCATI_LOG")).init();
    let code = riccati_cli::run(std::env::args_os(), &mut io::stdout(), &mut io::stderr());
    std::process::exit(code);
}
