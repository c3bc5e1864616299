//! Reference elements, quadrature, dof numbering and point evaluation for
//! the Q2c/Q2c/Q2c/P1dc space.

pub mod bc;
pub mod dofmap;
pub mod element;
pub mod function;
pub mod quadrature;

pub use bc::{BcSpec, DisplacementRule, InflowProfile, MeanVelocity, VelocityRule};
pub use dofmap::{BoundaryValue, Constraint, DofMap, Field};
pub use element::PointShape;
pub use function::{apply_row, FeFunction, PointLocation};
pub use quadrature::{LineRule, QuadratureRule};
