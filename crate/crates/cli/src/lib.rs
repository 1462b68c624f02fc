//! Library side of the `bioeco` command-line tool.

pub mod config;
pub mod emit;
pub mod run;

pub use config::{parse_config, parse_with_overrides, Command, Format, RunConfig};
pub use emit::emit;
pub use run::{run, ResultEnvelope};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config parse error: {0}")]
    Parse(String),

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("`{symbol}` is required by `{command}`")]
    MissingSymbol { symbol: String, command: Command },

    #[error("{0}")]
    InvalidValue(bioeco_core::Error),

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("numerical failure: {0}")]
    Numerical(bioeco_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 3,
            _ => 2,
        }
    }
}

impl From<bioeco_core::Error> for CliError {
    fn from(err: bioeco_core::Error) -> Self {
        use bioeco_core::Error as E;
        match err {
            E::InvalidParameter { .. } | E::InvalidConfig(_) | E::NegativeInitialState { .. } => {
                CliError::InvalidValue(err)
            }
            other => CliError::Numerical(other),
        }
    }
}
