//! Verification of the Daugavet equation `‖I + T‖ = 1 + ‖T‖` for operators on
//! finite models of `C(S)` given by atomic kernels.

pub mod asymptotic;
pub mod daugavet;
pub mod error;
pub mod foias;
pub mod measure;
pub mod models;
pub mod operator;
pub mod scalar;
pub mod search;

pub use error::{Error, Result};
pub use measure::{DiscreteSpace, SignedMeasure};
pub use operator::KernelOperator;
pub use scalar::{ComplexScalar, Rational, Scalar, Surd, Tolerance, Weight};
