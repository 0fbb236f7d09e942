use arimoto_rate::Error;
use thiserror::Error;

/// Everything that ends a command early, grouped by exit code.
#[derive(Debug, Error)]
pub enum Failure {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Solver(String),
    #[error("{0} of {1} reproduction rows failed")]
    Reproduction(usize, usize),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Reproduction(..) => 1,
            Failure::Input(_) => 2,
            Failure::Solver(_) => 3,
        }
    }

    pub fn input(context: &str, err: impl std::fmt::Display) -> Self {
        Failure::Input(format!("{context}: {err}"))
    }
}

/// Library errors raised while validating inputs are input errors; the rest
/// come from the numerical pipeline.
impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::TooSmall { .. }
            | Error::RaggedRow { .. }
            | Error::NonFinite { .. }
            | Error::NegativeEntry { .. }
            | Error::RowNotNormalized { .. }
            | Error::UselessOutputColumn(_)
            | Error::RankDeficient { .. }
            | Error::InvalidDistribution(_)
            | Error::LengthMismatch { .. }
            | Error::NotInterior(_) => Failure::Input(e.to_string()),
            _ => Failure::Solver(e.to_string()),
        }
    }
}
