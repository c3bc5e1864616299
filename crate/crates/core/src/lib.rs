//! Monolithic ALE fluid-structure interaction with a discrete adjoint for
//! estimating the solid shear modulus.
//!
//! The pointwise forms are generic over [`Scalar`]; assembled operators and
//! trajectories use `f64`. Jacobians, cross-step operators and control
//! sensitivities are exact, obtained by evaluating the same forms with
//! [`Dual`] numbers.

pub mod adjoint;
pub mod config;
pub mod error;
pub mod fem;
pub mod forms;
pub mod functionals;
pub mod linalg;
pub mod mesh;
pub mod newton;
pub mod optimize;
pub mod output;
pub mod problems;
pub mod scalar;
pub mod tensor;
pub mod timestepper;

pub use error::{Error, Result};
pub use scalar::{Dual, Scalar};

pub type Real = f64;
pub type Dual64 = Dual<f64>;
pub type Vector2 = tensor::Vec2<f64>;
pub type Matrix2 = tensor::Mat2<f64>;
