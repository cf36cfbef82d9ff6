use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown signal `{0}`")]
    UnknownSignal(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("signal `{0}` has zero emission probability")]
    ZeroSignalProbability(String),
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("invalid belief: {0}")]
    InvalidBelief(String),
    #[error("invalid signaling scheme: {0}")]
    InvalidScheme(String),
    #[error("scheme has {scheme} rows but the game has {game} states")]
    DimensionMismatch { scheme: usize, game: usize },
    #[error("operation requires exactly two states, got {0}")]
    NotTwoState(usize),
    #[error("game has no alternative to the default action")]
    NoAlternativeAction,
    #[error("degenerate utilities: utility gains are equal in both states")]
    DegenerateUtilities,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("likelihood ratio undefined at s = {0}")]
    DomainError(f64),
    #[error("likelihood ratio {0} exceeds the model's supremum {1}")]
    OutOfRange(f64, f64),
    #[error("trust {theta} is below the minimum persuadable trust {theta_star}")]
    Unpersuadable { theta: f64, theta_star: f64 },
    #[error("trust sits exactly at the persuasion boundary and the likelihood ratio is bounded")]
    Boundary,
    #[error("configuration error: {0}")]
    Config(String),
}
