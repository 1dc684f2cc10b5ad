use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid block coordinate p={p}, M={m}, k={k}: need p in {{0,1}} and k <= M")]
    InvalidCoord { p: u8, m: usize, k: usize },

    #[error("tail epsilon must lie in (0, 1), got {0}")]
    TailEpsilon(f64),

    #[error("cannot normalize a state with zero norm")]
    ZeroNorm,

    #[error("dual Hahn parameters require gamma > -1 and delta > -1 (gamma={gamma}, delta={delta})")]
    DualHahnParams { gamma: f64, delta: f64 },

    #[error("index {index} out of range 0..={max}")]
    OutOfRange { index: usize, max: usize },

    #[error("recurrence coefficient b_{k} vanished before the end of the family (N={n})")]
    DegenerateRecurrence { k: usize, n: usize },

    #[error("weight rho_{n}({l}) is not representable in floating point")]
    WeightRange { n: usize, l: usize },

    #[error("weight rho_{n}({l}) is not positive for these parameters")]
    NonPositiveWeight { n: usize, l: usize },

    #[error("model parameters must be finite")]
    NonFinite,

    #[error("coupling g is zero; the closed-form block construction divides by g, use the direct construction")]
    ZeroCoupling,

    #[error(
        "parameters are off the resonance surface: residuals 2w1-w2-g={0:e}, 2K1+g={1:e}, K2+2g={2:e}"
    )]
    NotResonant(f64, f64, f64),

    #[error("eigensolver did not converge for block p={p}, M={m}")]
    NoConvergence { p: u8, m: usize },

    #[error("matrix is not square or not symmetric")]
    NotSymmetric,

    #[error("observable {0:?} is not Hermitian")]
    NotHermitian(String),

    #[error("time grid must be strictly increasing")]
    TimeGrid,

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
