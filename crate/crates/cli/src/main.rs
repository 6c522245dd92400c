use std::process::ExitCode;

fn main() -> ExitCode {
    match cylsim_cli::run_from_args(std::env::args()) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            for path in &outcome.manifest.core.outputs {
                println!("wrote {path}");
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            let code = cylsim_cli::exit_code(&err);
            match err.downcast_ref::<clap::Error>() {
                Some(e) => {
                    let _ = e.print();
                }
                None => eprintln!("error: {err:#}"),
            }
            ExitCode::from(code as u8)
        }
    }
}
