use std::process::ExitCode;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let code = std::panic::catch_unwind(|| actortrace_cli::run_args(std::env::args_os(), std::io::stdout().lock()))
        .unwrap_or(3);
    ExitCode::from(code as u8)
}
