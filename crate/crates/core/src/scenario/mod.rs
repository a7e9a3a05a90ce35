//! Configured scenario runs with CSV output and a run manifest.
//!
//! Each scenario writes one or more CSV tables with fixed headers into the
//! output directory, plus `manifest.toml`. Sweep points are evaluated on a
//! rayon pool and collected in input order, so the CSV bytes depend only on
//! the configuration and the seed.

mod config;
mod runners;

pub use config::{
    DualRailSection, EngineChoice, MultiroundSection, Overrides, ProtocolSection, Scenario, ScenarioConfig,
    SweepSection, SystemSection, TomographySection, VacuumModelChoice,
};

use crate::error::{DmmError, DmmResult};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// A CSV table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&'static str]) -> Self {
        Self { name: name.to_string(), header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    /// Column index by header name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| *h == name)
    }
}

/// Shortest round-trip decimal form of a float.
pub(crate) fn num(x: f64) -> String {
    format!("{x}")
}

/// Tables produced by one scenario, before anything touches the disk.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutput {
    pub scenario: Scenario,
    pub tables: Vec<Table>,
}

impl ScenarioOutput {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

/// What a finished run wrote.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub scenario: Scenario,
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub wall_time_s: f64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    scenario: &'a str,
    code_version: &'a str,
    seed: Option<u64>,
    threads: usize,
    wall_time_s: f64,
    files: Vec<String>,
    config: &'a ScenarioConfig,
}

/// Compute the tables of the configured scenario on a pool of `threads` workers.
pub fn compute_scenario(config: &ScenarioConfig) -> DmmResult<ScenarioOutput> {
    let scenario = config.checked_scenario()?;
    let threads = config.threads.unwrap_or(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| DmmError::config(format!("cannot start {threads} worker threads: {e}")))?;
    let tables = pool.install(|| runners::run(scenario, config))?;
    Ok(ScenarioOutput { scenario, tables })
}

/// Run the scenario and write its CSV tables and `manifest.toml` to the output directory.
pub fn run_scenario(config: &ScenarioConfig) -> DmmResult<RunReport> {
    let start = Instant::now();
    let out = compute_scenario(config)?;
    let dir = config.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir)?;
    let mut files = Vec::new();
    for t in &out.tables {
        let path = dir.join(t.file_name());
        std::fs::write(&path, t.to_csv())?;
        files.push(path);
    }
    let wall_time_s = start.elapsed().as_secs_f64();
    let manifest = Manifest {
        scenario: out.scenario.name(),
        code_version: env!("CARGO_PKG_VERSION"),
        seed: config.seed,
        threads: config.threads.unwrap_or(1),
        wall_time_s,
        files: out.tables.iter().map(Table::file_name).collect(),
        config,
    };
    let text = toml::to_string(&manifest).map_err(|e| DmmError::config(format!("cannot write manifest: {e}")))?;
    let mpath = dir.join("manifest.toml");
    std::fs::write(&mpath, text)?;
    files.push(mpath);
    Ok(RunReport { scenario: out.scenario, out_dir: dir, files, wall_time_s })
}

/// Human-readable one-line summary per written file.
pub fn describe(report: &RunReport) -> String {
    let mut s = format!("{} finished in {:.2} s\n", report.scenario, report.wall_time_s);
    for f in &report.files {
        let _ = writeln!(s, "  wrote {}", f.display());
    }
    s
}

/// Load a config file (or start from defaults) and apply command-line overrides.
pub fn resolve_config(path: Option<&Path>, overrides: &Overrides) -> DmmResult<ScenarioConfig> {
    let base = match path {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::default(),
    };
    Ok(base.apply(overrides))
}
