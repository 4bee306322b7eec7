//! Drives a run through the configuration layer, as the command-line tool
//! does, and lists the files it wrote.

use cavity_jumps::config::{parse_config, Overrides};
use cavity_jumps::experiment::run_experiment;

const CONFIG: &str = r#"
kind = "telegraph"

[model]
omega_m = 0.1

[run]
n_traj = 4
horizon_tdark = 10
seed = 5
eta = [0.5, 1.0]
"#;

fn main() -> cavity_jumps::Result<()> {
    let out = std::env::temp_dir().join("cavity-jumps-example");
    let overrides = Overrides {
        out: Some(out),
        ..Overrides::default()
    };
    let config = parse_config(CONFIG, &overrides)?;
    let outcome = run_experiment(&config)?;
    print!("{}", outcome.summary);
    for file in &outcome.files {
        println!("{}", file.display());
    }
    Ok(())
}
