//! Special functions, uniform-grid quadrature and a dense Hermitian
//! eigensolver. Everything here is a pure function of its inputs.

mod eigen;
mod entropy;
mod quadrature;
mod special;

pub use eigen::{hermitian_eigenvalues, HermitianMatrix, HermitianSpectrum};
pub use entropy::{entropy_of_spectrum, shannon_entropy_nats};
pub use quadrature::{integrate_line, integrate_polar, LineGrid, PolarGrid, QuadratureSpec};
pub use special::{bessel_i, gen_exp};

/// Relative size of the next series term at which summation stops.
pub const SERIES_TOLERANCE: f64 = 1e-16;
