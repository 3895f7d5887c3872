use thiserror::Error;

/// Diagnostics attached to a failed index estimate.
#[derive(Debug, Clone)]
pub struct PlateauDiagnostics {
    /// Interior spectral gap per truncation size.
    pub gaps: Vec<(usize, f64)>,
    /// Per-size integer readings (svd, heat); `None` means the method
    /// produced no stable integer at that size.
    pub readings: Vec<(usize, Option<i64>, Option<i64>)>,
    /// True when the interior gap shrinks as the truncation grows,
    /// which points at a non-invertible symbol rather than a too-small window.
    pub closing_gap: bool,
}

impl std::fmt::Display for PlateauDiagnostics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "no plateau (closing_gap={}, gaps={:?})",
            self.closing_gap, self.gaps
        )
    }
}

#[derive(Error, Debug)]
pub enum Error {
    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),
    #[error("resolution {got} below the minimum of {min}")]
    BadResolution { got: usize, min: usize },
    #[error("form degree {degree} does not match carrier dimension {carrier_dim}")]
    DegreeMismatch { degree: usize, carrier_dim: usize },
    #[error("group elements belong to different groups")]
    GroupMismatch,
    #[error("symbols live in different algebras: {0}")]
    AlgebraMismatch(String),
    #[error("symbol is not elliptic: {0}")]
    NotElliptic(String),
    #[error("inverse support truncation insufficient (residual {residual:.3e})")]
    TruncationInsufficient { residual: f64 },
    #[error("differential of a top-degree form")]
    TopDegree,
    #[error("decay fit needs support on at least 3 distinct word lengths")]
    InsufficientSupport,
    #[error("operator term outside the supported vocabulary: {0}")]
    UnsupportedTerm(String),
    #[error("index estimate did not stabilize: {0}")]
    NoPlateau(PlateauDiagnostics),
    #[error("operation undefined on an empty stratum")]
    EmptyStratum,
    #[error("normal rotation angle {0:.3e} vanishes mod 2pi")]
    VanishingAngle(f64),
    #[error("element is not idempotent (|p*p - p| = {0:.3e})")]
    NotIdempotent(f64),
    #[error("invalid scenario: {0}")]
    ScenarioInvalid(String),
    #[error("parse error: {0}")]
    ParseError(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
