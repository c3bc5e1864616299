//! Material parameters and the control parameterization.

use crate::error::{Error, Result};

/// How λ follows the controlled shear modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ControlMode {
    /// `λ = 2μν_s/(1 − 2ν_s)` after every update.
    PoissonLocked,
    /// λ stays at its configured value.
    MuOnly,
}

/// Which solid cells take their shear modulus from the control.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ControlRegion {
    WholeSolid,
    /// Solid cells with a non-zero tag.
    Tagged,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaterialParams {
    pub rho_f: f64,
    pub nu_f: f64,
    pub rho_s: f64,
    /// Shear modulus of solid cells outside the control region.
    pub mu: f64,
    /// First Lamé parameter in `MuOnly` mode.
    pub lambda: f64,
    pub nu_s: f64,
    /// Mesh-motion parameter α̂.
    pub alpha_mesh: f64,
    pub control_mode: ControlMode,
    pub control_region: ControlRegion,
}

impl MaterialParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rho_f", self.rho_f),
            ("nu_f", self.nu_f),
            ("rho_s", self.rho_s),
            ("alpha_mesh", self.alpha_mesh),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::Config(format!("material.{name} must be > 0, got {v}")));
            }
        }
        if !(self.nu_s < 0.5 && self.nu_s > -1.0) {
            return Err(Error::Config(format!(
                "material.nu_s must lie in (-1, 0.5), got {}",
                self.nu_s
            )));
        }
        Ok(())
    }

    /// `dλ/dμ` of the control mode.
    pub fn dlambda_dmu(&self) -> f64 {
        match self.control_mode {
            ControlMode::PoissonLocked => 2.0 * self.nu_s / (1.0 - 2.0 * self.nu_s),
            ControlMode::MuOnly => 0.0,
        }
    }

    pub fn lambda_for(&self, mu: f64) -> f64 {
        match self.control_mode {
            ControlMode::PoissonLocked => self.dlambda_dmu() * mu,
            ControlMode::MuOnly => self.lambda,
        }
    }

    pub fn in_control_region(&self, tag: u32) -> bool {
        match self.control_region {
            ControlRegion::WholeSolid => true,
            ControlRegion::Tagged => tag != 0,
        }
    }

    /// `(μ, λ)` of a solid cell with tag `tag` under control `q`.
    pub fn lame(&self, tag: u32, q: f64) -> (f64, f64) {
        let mu = if self.in_control_region(tag) { q } else { self.mu };
        (mu, self.lambda_for(mu))
    }
}

/// Checks the control vector (one shear modulus, strictly positive).
pub fn check_control(q: &[f64]) -> Result<f64> {
    if q.len() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: q.len(),
        });
    }
    if !(q[0] > 0.0) || !q[0].is_finite() {
        return Err(Error::InvalidControl(q.to_vec()));
    }
    Ok(q[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> MaterialParams {
        MaterialParams {
            rho_f: 1e3,
            nu_f: 1e-3,
            rho_s: 1e3,
            mu: 1e9,
            lambda: 0.0,
            nu_s: 0.4,
            alpha_mesh: 1e-5,
            control_mode: ControlMode::PoissonLocked,
            control_region: ControlRegion::Tagged,
        }
    }

    #[test]
    fn poisson_locking() {
        let p = params();
        assert!((p.lambda_for(0.5e6) - 2.0e6).abs() < 1e-6);
        assert!((p.dlambda_dmu() - 4.0).abs() < 1e-15);
        assert_eq!(p.lame(0, 7.0).0, 1e9);
        assert_eq!(p.lame(1, 7.0).0, 7.0);
    }

    #[test]
    fn control_must_be_positive() {
        assert!(matches!(check_control(&[-1.0]), Err(Error::InvalidControl(_))));
        assert!(matches!(check_control(&[0.0]), Err(Error::InvalidControl(_))));
        assert!(check_control(&[1.0, 2.0]).is_err());
        assert_eq!(check_control(&[3.0]).unwrap(), 3.0);
    }
}
