//! Numerical laboratory for the spectral theory of two-point boundary value
//! problems on the unit interval.
//!
//! The crate covers the full pipeline from boundary-condition normalization
//! through Birkhoff-regularity classification, characteristic values, Green's
//! functions and eigenfunction-expansion partial sums, up to the
//! whole-interval comparison machinery (alpha numbers, singular integrals,
//! equiconvergence reports), plus two satellite toolboxes: pseudofunctions on
//! the circle and half-line Schrödinger spectral functions.

pub mod equiconv;
pub mod error;
pub mod expansion;
pub mod linalg;
pub mod model;
pub mod regularity;
pub mod sfun;
pub mod singular;
pub mod solver;
pub mod torus;

pub use error::SpectralError;
pub use model::{
    BcRow, CoefficientDescriptor, DifferentialExpression, FunctionKind, Grid,
    NormalizedBoundaryConditions, OperatorSpec, RawBoundaryForm, SampledFunction, SpectralPoint,
};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Master tolerance defaults shared by the numerical kernels.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Quadrature target accuracy.
    pub quad: f64,
    /// Root polishing target (relative to local determinant scale).
    pub root: f64,
    /// Adaptive ODE local error target.
    pub ode: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { quad: 1e-10, root: 1e-10, ode: 1e-12 }
    }
}
