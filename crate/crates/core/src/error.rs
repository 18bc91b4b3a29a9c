use thiserror::Error;

/// Domain errors surfaced by the spectral machinery.
///
/// Every variant maps to exit code 2 in the CLI; anything else (I/O, panics)
/// is an internal error.
#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("boundary forms are linearly dependent: {0}")]
    RankDeficient(String),

    #[error("coefficient p_{{n-1}} is not flagged smooth")]
    NotSmooth,

    #[error("quadrature failed to reach tolerance {tol:e} (estimated error {estimate:e})")]
    ToleranceNotMet { tol: f64, estimate: f64 },

    #[error("ODE step size underflow at x = {x}")]
    StepFailure { x: f64 },

    #[error("request exceeds the configured desk-scale cap: {0}")]
    CapExceeded(String),

    #[error("evaluation point too close to a characteristic value (|rho - rho_j| = {dist:e})")]
    NearPole { dist: f64 },

    #[error("winding count mismatch after maximal subdivision: {0}")]
    WindingMismatch(String),

    #[error("no offset alpha achieves separation >= {eps_min} (best {best})")]
    NoSeparatingAlpha { eps_min: f64, best: f64 },

    #[error("characteristic values too clustered for residue circles: {0}")]
    ClusterTooTight(String),

    #[error("kernel geometry degenerate: |x-xi| and |xi-t| both vanish")]
    DegenerateGeometry,

    #[error("operator is not Birkhoff-regular: {0}")]
    NotRegular(String),

    #[error("operator orders differ: {0} vs {1}")]
    OrderMismatch(usize, usize),

    #[error("function does not vanish at the endpoints (|f(0)|+|f(1)| = {0:e})")]
    EndpointNotZero(f64),

    #[error("expanded function violates a zero-order boundary condition (|violation| = {0:e})")]
    AdmissibilityFailed(f64),

    #[error("closed-form spectral function disagrees with the oracle by {0:.1}%")]
    OracleMismatch(f64),

    #[error("oracle grid too coarse: N = {n} < required {required}")]
    ResolutionTooCoarse { n: usize, required: usize },

    #[error("unsupported configuration: {0}")]
    NotSupported(String),
}

pub type Result<T> = std::result::Result<T, SpectralError>;
