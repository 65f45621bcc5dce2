use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QgameError {
    #[error("matrix is not unitary (max |M^dag M - I| entry = {deviation:e})")]
    NonUnitaryInput { deviation: f64 },

    #[error("closed form requires classical or restricted strategies, got full SU(2)")]
    WrongSpace,

    #[error("payoffs must satisfy alpha > beta > gamma (got {alpha}, {beta}, {gamma})")]
    InvalidOrdering { alpha: f64, beta: f64, gamma: f64 },

    #[error("outcome mass p_oo + p_tt = {total} exceeds 1")]
    InvalidMass { total: f64 },

    #[error("game is trivial: some outcome cell reaches the sum of both players' maxima")]
    TrivialGame,

    #[error("entanglement parameter {0} outside [0, pi/2]")]
    InvalidDelta(f64),

    #[error("non-finite value: {0}")]
    NonFinite(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("profile mixes strategy spaces")]
    MixedSpaces,
}

pub type Result<T> = std::result::Result<T, QgameError>;
