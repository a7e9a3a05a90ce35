use clap::Parser;
use darkmode::scenario::{describe, resolve_config, run_scenario, Overrides, Scenario};
use std::path::PathBuf;
use std::process::ExitCode;

/// Run a dark-mode-measurement scenario and write CSV tables plus a manifest.
#[derive(Parser, Debug)]
#[command(name = "dmm", version)]
struct Args {
    /// TOML configuration file (frequencies in Hz, times in µs).
    #[arg(long)]
    config: Option<PathBuf>,
    /// regimes | transfer-efficiency | phase-sweep | entangle | alpha-sweep |
    /// teleport | tomo-demo | dual-rail | error-budget | multiround
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let result = (|| {
        let scenario = args.scenario.as_deref().map(str::parse::<Scenario>).transpose()?;
        let overrides = Overrides { scenario, seed: args.seed, out: args.out.clone(), threads: args.threads };
        let config = resolve_config(args.config.as_deref(), &overrides)?;
        run_scenario(&config)
    })();
    match result {
        Ok(report) => {
            print!("{}", describe(&report));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
