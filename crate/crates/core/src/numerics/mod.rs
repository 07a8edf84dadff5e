//! Numerical substrate: dual numbers, holomorphic jets, circle quadrature and
//! dense hermitian / symmetric linear algebra.

pub mod dual;
pub mod jet;
pub mod linalg;
pub mod quadrature;

pub use dual::{Dual, Hyper, Scalar};
pub use jet::{directional_derivative, holomorphic_gradient, holomorphic_jet, mixed_hessian, ComplexJet, Jet};
pub use linalg::{hermitian_to_real, hermitian_to_real_checked, HermitianMatrix, RealSymMatrix};
pub use quadrature::{circle_integral, ContourConfig, DEFAULT_SAMPLES, MIN_SAMPLES};
