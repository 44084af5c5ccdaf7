use std::process::ExitCode;

fn main() -> ExitCode {
    match bpls_experiments::cli::run_from(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => match e.downcast_ref::<clap::Error>() {
            Some(c) => {
                let _ = c.print();
                ExitCode::from(c.exit_code() as u8)
            }
            None => {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
        },
    }
}
