//! Numerical engine for the c-map.
//!
//! Starting from a degree-two homogeneous prepotential `F(X)`, this crate
//! builds
//!
//! * the rigid and projective special Kähler data ([`special_kahler`]),
//! * the explicit quaternion-Kähler (Ferrara–Sabharwal) metric and its
//!   Heisenberg-type isometries ([`qk_metric`]),
//! * the hyperkähler-cone function `ℒ`, by residue and by circle quadrature,
//!   and its Legendre transform `χ` ([`hkc`]),
//! * the twistor-space Kähler potential, the holomorphic one-form and the
//!   metric they induce ([`twistor`]),
//!
//! and cross-checks them against each other, including a finite-difference
//! Einstein test ([`curvature`]).

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod curvature;
pub mod error;
pub mod hkc;
pub mod numerics;
pub mod prepotential;
pub mod qk_metric;
pub mod special_kahler;
pub mod twistor;

pub use error::{Error, Result};
pub use prepotential::{CubicModel, Model, Prepotential, QuadraticModel};
