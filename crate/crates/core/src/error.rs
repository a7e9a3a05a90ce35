use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Error)]
pub enum DmmError {
    /// Bad user input: invalid dimensions, labels, parameters or config keys.
    #[error("configuration error: {0}")]
    Config(String),

    /// A state or operator no longer fits in the chosen Fock truncation.
    #[error("truncation error on mode {mode}: estimated tail weight {tail:.3e} exceeds {limit:.1e}")]
    Truncation { mode: usize, tail: f64, limit: f64 },

    /// Operands living on different Hilbert spaces or with incompatible shapes.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Integrator blow-up, optimizer stagnation and similar failures.
    #[error("numerical failure in {module}: {msg}")]
    Numerical { module: &'static str, msg: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl DmmError {
    pub(crate) fn numerical(module: &'static str, msg: impl Into<String>) -> Self {
        Self::Numerical { module, msg: msg.into() }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Self::Dimension(msg.into())
    }

    /// Process exit code used by the scenario runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io(_) => 2,
            _ => 3,
        }
    }
}

pub type DmmResult<T> = Result<T, DmmError>;
