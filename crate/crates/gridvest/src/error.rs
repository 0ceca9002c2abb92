//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    /// Ingestion or validation failure; the message carries slot coordinates
    /// where applicable.
    #[error("{0}")]
    Data(String),
    #[error("config: {0}")]
    Config(String),
    #[error("solver: {0}")]
    Milp(#[from] gridvest_milp::MilpError),
    /// The planning model has no feasible dispatch. With curtailment off
    /// this usually means a PV surplus slot that nothing can absorb.
    #[error("infeasible plan: {0}")]
    Infeasible(String),
    /// Branch-and-bound hit a node or time cap before closing the gap.
    #[error("solve stopped at gap {gap:.3e}: {detail}")]
    GapLimit { gap: f64, detail: String },
    /// The independent audit of a returned solution failed.
    #[error("solution audit failed: {0}")]
    Audit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    /// True for failures of the input kind (exit code 2 in the CLI),
    /// as opposed to solve failures (exit code 1).
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io(_) | Error::Csv(_) | Error::Data(_) | Error::Config(_)
        )
    }
}
