use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("zero-norm state vector cannot be normalized")]
    ZeroNorm,

    #[error("splitter amplitudes are not normalized: |r|^2 + |t|^2 = {norm_sq}")]
    DegenerateAmplitudes { norm_sq: f64 },

    #[error("{name} is not unitary (residual {residual:.3e})")]
    NotUnitary { name: &'static str, residual: f64 },

    #[error("Bloch axis must be a unit vector (norm {norm})")]
    InvalidAxis { norm: f64 },

    #[error("operator is not a valid {role}: {reason}")]
    InvalidOperator { role: &'static str, reason: String },

    #[error("invalid meter: {0}")]
    InvalidMeter(String),

    #[error("preparation and post-selection are orthogonal (Tr[E_f rho_i] = {overlap:.3e}); use the matrix-element path")]
    NearOrthogonal { overlap: f64 },

    #[error("post-selection has vanishing probability ({value:.3e})")]
    ZeroPostselection { value: f64 },

    #[error("moments diverge in this limit; the cross-average scales as 1/r^2 with r^2 = {overlap_sq:.3e}")]
    Divergent { overlap_sq: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid spacing {spacing} does not divide the unit pointer shift")]
    IncommensurateGrid { spacing: f64 },

    #[error("grid does not cover the meter support (tail mass {tail:.3e})")]
    InsufficientCoverage { tail: f64 },

    #[error("empty trial record set")]
    EmptyRecords,

    #[error("csv output failed: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
