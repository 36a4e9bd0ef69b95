//! Exact machinery for weighted kernels of general orthonormal series.
//!
//! For an orthonormal system `φ_k` on `[0, 1]`, sequences `d` and `a`, the
//! kernel `Q_n(x) = Σ_{k≤n} d_k a_k ln(k) φ_k(x)` defines linear functionals
//! `U_n(f) = ∫₀¹ f Q_n` on functions of bounded variation. Their boundedness
//! is governed by `B_n = max_{1≤i<n} |∫₀^{i/n} Q_n|`.
//!
//! Everything here is computed in closed form on piecewise-affine test
//! functions for the trigonometric, Walsh-Paley and Haar systems:
//!
//! * [`ons`]: point values, primitives and second primitives of the bases;
//! * [`piecewise`]: the test functions, their variation and norms, exact
//!   Fourier coefficients;
//! * [`functionals`]: weight plans, `Q_n`, `U_n`, `B_n` and coefficient sums;
//! * [`decomposition`]: the three-term summation-by-parts split and the ramp
//!   test functions;
//! * [`experiments`]: scans over `n` with CSV/JSON output.
//!
//! [`quadrature`] is a pointwise Gauss-Legendre oracle for testing.

pub mod decomposition;
pub mod error;
pub mod experiments;
pub mod functionals;
pub mod ons;
pub mod piecewise;
pub mod quadrature;
pub mod sampling;

pub use decomposition::{decompose, sharpness_lower_bound, sharpness_ramp, DecompositionResult, Kernel};
pub use error::{Error, Result};
pub use functionals::{ASequence, CoefficientTable, DSequence, WeightPlan, WeightedKernel};
pub use ons::{BasisIndex, SystemKind};
pub use piecewise::{BvFunction, NormReport, Segment};
