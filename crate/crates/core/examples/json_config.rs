//! Run a moment batch from a JSON configuration and print CSV.

use zsinh::cli::{cmd_moment, RunConfig};

const CONFIG: &str = r#"{
  "schema_version": 1,
  "task": "moment",
  "model": {"type": "kobol", "c": "0.1", "nu": "0.5", "lambda": "1.01", "mu": "0.05"},
  "n_range": [100, 105],
  "method": "auto",
  "eps": "1e-14",
  "oracle": true
}"#;

fn main() {
    let config = match RunConfig::from_json(CONFIG) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    };
    match cmd_moment(&config) {
        Ok(report) => {
            print!("{}", report.csv());
            println!("# {}", report.summary);
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
