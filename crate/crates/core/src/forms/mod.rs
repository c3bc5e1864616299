//! Variational forms of the monolithic ALE system.

pub mod assembly;
pub mod kinematics;
pub mod material;
pub mod pointwise;

pub use assembly::Assembler;
pub use kinematics::{kinematics, Degenerate, Kinematics};
pub use material::{check_control, ControlMode, ControlRegion, MaterialParams};
pub use pointwise::{Coefficients, Group, Jet, Weights};
