use std::io;
use std::path::PathBuf;

use adaptive_dg_core::adapt::AdaptFailure;

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID_CONFIG: i32 = 2;
pub const EXIT_SOLVER_FAILURE: i32 = 3;
pub const EXIT_VERIFICATION_FAILURE: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Core(#[from] adaptive_dg_core::Error),
    #[error("adaptive run failed: {0}")]
    Run(Box<AdaptFailure>),
    #[error("{failed} of {total} sweep run(s) failed")]
    Sweep { failed: usize, total: usize },
    #[error("{failed} verification check(s) failed")]
    Verification { failed: usize },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    pub fn io(context: impl Into<String>, source: io::Error) -> Self {
        Self::Io {
            context: context.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Format { .. } => EXIT_INVALID_CONFIG,
            Self::Core(e) => core_exit_code(e),
            Self::Run(f) => core_exit_code(&f.error),
            Self::Sweep { .. } => EXIT_SOLVER_FAILURE,
            Self::Verification { .. } => EXIT_VERIFICATION_FAILURE,
            Self::Io { .. } => EXIT_IO,
        }
    }
}

fn core_exit_code(e: &adaptive_dg_core::Error) -> i32 {
    use adaptive_dg_core::Error as E;
    match e {
        E::InvalidConfig(_)
        | E::InadmissiblePenalty(_)
        | E::NonFiniteVertex { .. }
        | E::VertexOutOfRange { .. }
        | E::RepeatedVertex { .. }
        | E::DegenerateTriangle { .. }
        | E::NonManifoldEdge { .. }
        | E::HangingNode { .. } => EXIT_INVALID_CONFIG,
        _ => EXIT_SOLVER_FAILURE,
    }
}

pub type CliResult<T> = Result<T, CliError>;
