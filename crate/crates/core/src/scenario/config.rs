use crate::dynamics::SystemParams;
use crate::error::{DmmError, DmmResult};
use crate::protocol::{DmmOptions, Engine, NoiseFlags, ProtocolTiming, VacuumCheckModel};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

/// Every scenario the runner knows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Regimes,
    TransferEfficiency,
    PhaseSweep,
    Entangle,
    AlphaSweep,
    Teleport,
    TomoDemo,
    DualRail,
    ErrorBudget,
    Multiround,
}

impl Scenario {
    pub const ALL: [Scenario; 10] = [
        Scenario::Regimes,
        Scenario::TransferEfficiency,
        Scenario::PhaseSweep,
        Scenario::Entangle,
        Scenario::AlphaSweep,
        Scenario::Teleport,
        Scenario::TomoDemo,
        Scenario::DualRail,
        Scenario::ErrorBudget,
        Scenario::Multiround,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Regimes => "regimes",
            Self::TransferEfficiency => "transfer-efficiency",
            Self::PhaseSweep => "phase-sweep",
            Self::Entangle => "entangle",
            Self::AlphaSweep => "alpha-sweep",
            Self::Teleport => "teleport",
            Self::TomoDemo => "tomo-demo",
            Self::DualRail => "dual-rail",
            Self::ErrorBudget => "error-budget",
            Self::Multiround => "multiround",
        }
    }

    /// Scenarios that draw random numbers and therefore need a seed.
    pub fn needs_seed(self) -> bool {
        matches!(self, Self::TomoDemo)
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scenario {
    type Err = DmmError;

    fn from_str(s: &str) -> DmmResult<Self> {
        Self::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| DmmError::config(format!("unknown scenario '{s}'")))
    }
}

/// System parameters in file units: frequencies in Hz (not angular), times in µs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemSection {
    pub g1: f64,
    pub g2: f64,
    pub kappa_b: f64,
    pub t1_a1: f64,
    pub t1_a2: f64,
    pub k1: f64,
    pub k2: f64,
    pub chi_a1t1: f64,
    pub chi_a2t2: f64,
    pub chi_bt1: f64,
    pub chi_bt2: f64,
    pub alpha_t1: f64,
    pub alpha_t2: f64,
    pub delta_fsr: f64,
    pub t_dump: f64,
}

impl Default for SystemSection {
    fn default() -> Self {
        Self::from_params(&SystemParams::default())
    }
}

impl SystemSection {
    pub fn from_params(p: &SystemParams) -> Self {
        let hz = |w: f64| w / TAU;
        let us = |t: f64| t * 1e6;
        Self {
            g1: hz(p.g1),
            g2: hz(p.g2),
            kappa_b: hz(p.kappa_b),
            t1_a1: us(p.t1_a1),
            t1_a2: us(p.t1_a2),
            k1: hz(p.k1),
            k2: hz(p.k2),
            chi_a1t1: hz(p.chi_a1t1),
            chi_a2t2: hz(p.chi_a2t2),
            chi_bt1: hz(p.chi_bt1),
            chi_bt2: hz(p.chi_bt2),
            alpha_t1: hz(p.alpha_t1),
            alpha_t2: hz(p.alpha_t2),
            delta_fsr: hz(p.delta_fsr),
            t_dump: us(p.t_dump),
        }
    }

    /// Convert to angular frequencies and seconds.
    pub fn to_params(&self) -> DmmResult<SystemParams> {
        let w = |f: f64| f * TAU;
        let s = |t: f64| t * 1e-6;
        let p = SystemParams {
            g1: w(self.g1),
            g2: w(self.g2),
            kappa_b: w(self.kappa_b),
            t1_a1: s(self.t1_a1),
            t1_a2: s(self.t1_a2),
            k1: w(self.k1),
            k2: w(self.k2),
            chi_a1t1: w(self.chi_a1t1),
            chi_a2t2: w(self.chi_a2t2),
            chi_bt1: w(self.chi_bt1),
            chi_bt2: w(self.chi_bt2),
            alpha_t1: w(self.alpha_t1),
            alpha_t2: w(self.alpha_t2),
            delta_fsr: w(self.delta_fsr),
            t_dump: s(self.t_dump),
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VacuumModelChoice {
    Ideal,
    Reference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineChoice {
    Branches,
    Master,
}

/// Heralding options. Times in µs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolSection {
    /// Cat amplitude of the single-point scenarios.
    pub alpha: f64,
    /// Amplitudes of the alpha sweep.
    pub alphas: Vec<f64>,
    pub p_decode: f64,
    pub cavity_loss: bool,
    pub kerr: bool,
    pub vacuum_check: VacuumModelChoice,
    pub engine: EngineChoice,
    /// Cavity truncation; 0 picks one from `α`.
    pub cavity_dim: usize,
    /// Bus truncation for the master-equation engine; 0 picks the default.
    pub bus_dim: usize,
    pub t_prep: f64,
    pub t_pi: f64,
    pub t_readout: f64,
    /// Optimize the logical basis of cavity 1 before reporting fidelities.
    pub optimize_basis: bool,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        let t = ProtocolTiming::default();
        Self {
            alpha: 1.414,
            alphas: vec![1.0, 1.2, 1.414, 1.6, 1.8, 2.0],
            p_decode: 0.017,
            cavity_loss: true,
            kerr: false,
            vacuum_check: VacuumModelChoice::Reference,
            engine: EngineChoice::Branches,
            cavity_dim: 0,
            bus_dim: 0,
            t_prep: t.t_prep / 1e-6,
            t_pi: t.t_pi / 1e-6,
            t_readout: t.t_readout / 1e-6,
            optimize_basis: true,
        }
    }
}

impl ProtocolSection {
    pub fn noise(&self) -> NoiseFlags {
        NoiseFlags { cavity_loss: self.cavity_loss, kerr: self.kerr, p_decode: self.p_decode }
    }

    pub fn vacuum_model(&self) -> VacuumCheckModel {
        match self.vacuum_check {
            VacuumModelChoice::Ideal => VacuumCheckModel::ideal(),
            VacuumModelChoice::Reference => VacuumCheckModel::reference(),
        }
    }

    pub fn options(&self, alpha: f64) -> DmmOptions {
        let engine = match self.engine {
            EngineChoice::Branches => Engine::Branches,
            EngineChoice::Master => Engine::Master,
        };
        let dims = (self.cavity_dim > 0 || self.bus_dim > 0).then(|| {
            let c = if self.cavity_dim > 0 { self.cavity_dim } else { crate::protocol::default_cavity_dim(alpha) };
            let b = if self.bus_dim > 0 { self.bus_dim } else { 16 };
            [c, b, c]
        });
        let timing = ProtocolTiming { t_prep: self.t_prep * 1e-6, t_pi: self.t_pi * 1e-6, t_readout: self.t_readout * 1e-6 };
        DmmOptions { engine, dims, timing, basis: None }
    }

    pub fn checked_alpha(&self) -> DmmResult<f64> {
        if self.alpha > 0.0 && self.alpha.is_finite() {
            Ok(self.alpha)
        } else {
            Err(DmmError::config(format!("protocol.alpha = {} must be positive", self.alpha)))
        }
    }
}

/// Grids of the sweep scenarios. Frequencies in Hz, times in µs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// Bus decay rates of the regimes scenario.
    pub kappa_list: Vec<f64>,
    pub regimes_t_max: f64,
    pub regimes_points: usize,
    pub transfer_t_max: f64,
    pub phase_points: usize,
    pub time_points: usize,
    pub phase_t_max: f64,
    pub budget_alpha_min: f64,
    pub budget_alpha_max: f64,
    pub budget_points: usize,
    /// Budget protocol duration.
    pub budget_t_protocol: f64,
    pub bright_leak: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            kappa_list: vec![160e3, 600e3, 905e3, 2000e3],
            regimes_t_max: 8.0,
            regimes_points: 401,
            transfer_t_max: 3.0,
            phase_points: 73,
            time_points: 41,
            phase_t_max: 4.0,
            budget_alpha_min: 0.5,
            budget_alpha_max: 2.5,
            budget_points: 201,
            budget_t_protocol: 5.592,
            bright_leak: 0.015,
        }
    }
}

/// Wigner tomography demo settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TomographySection {
    pub shots: u64,
    pub grid_extent: f64,
    pub grid_points: usize,
    pub mle_dim: usize,
}

impl Default for TomographySection {
    fn default() -> Self {
        Self { shots: 10_000, grid_extent: 2.5, grid_points: 41, mle_dim: 10 }
    }
}

/// Repeat-until-success inputs. Times in µs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MultiroundSection {
    pub p_success: f64,
    pub t_attempt: f64,
    pub t_reset: f64,
}

impl Default for MultiroundSection {
    fn default() -> Self {
        Self { p_success: 1.0 / 2.6, t_attempt: 8.85, t_reset: 0.0 }
    }
}

/// Dual-rail settings. Time in µs; 0 picks the settle time.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DualRailSection {
    pub t: f64,
}

/// Full run configuration, as read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Option<Scenario>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default)]
    pub protocol: ProtocolSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub tomography: TomographySection,
    #[serde(default)]
    pub multiround: MultiroundSection,
    #[serde(default)]
    pub dual_rail: DualRailSection,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: None,
            seed: None,
            out: None,
            threads: None,
            system: SystemSection::default(),
            protocol: ProtocolSection::default(),
            sweep: SweepSection::default(),
            tomography: TomographySection::default(),
            multiround: MultiroundSection::default(),
            dual_rail: DualRailSection::default(),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub scenario: Option<Scenario>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl ScenarioConfig {
    pub fn from_toml_str(s: &str) -> DmmResult<Self> {
        toml::from_str(s).map_err(|e| DmmError::config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> DmmResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DmmError::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> DmmResult<String> {
        toml::to_string(self).map_err(|e| DmmError::config(format!("cannot serialize config: {e}")))
    }

    pub fn apply(mut self, o: &Overrides) -> Self {
        if o.scenario.is_some() {
            self.scenario = o.scenario;
        }
        if o.seed.is_some() {
            self.seed = o.seed;
        }
        if o.out.is_some() {
            self.out = o.out.clone();
        }
        if o.threads.is_some() {
            self.threads = o.threads;
        }
        self
    }

    /// Scenario, with the seed requirement checked.
    pub fn checked_scenario(&self) -> DmmResult<Scenario> {
        let s = self.scenario.ok_or_else(|| DmmError::config("no scenario given"))?;
        if s.needs_seed() && self.seed.is_none() {
            return Err(DmmError::config(format!("scenario '{s}' samples shots and needs a seed")));
        }
        if self.threads == Some(0) {
            return Err(DmmError::config("threads must be at least 1"));
        }
        Ok(s)
    }

    pub fn params(&self) -> DmmResult<SystemParams> {
        self.system.to_params()
    }
}
