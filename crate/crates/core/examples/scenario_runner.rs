//! Drive the scenario runner from a TOML file, as the `dmm` binary does.
//!
//! ```bash
//! cargo run --release --example scenario_runner
//! ```

use darkmode::scenario::{compute_scenario, ScenarioConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = include_str!("configs/alpha_sweep.toml");
    let config = ScenarioConfig::from_toml_str(text)?;
    let out = compute_scenario(&config)?;
    for t in &out.tables {
        println!("== {}", t.file_name());
        print!("{}", t.to_csv());
    }
    Ok(())
}
