//! Boundary-condition rules and inflow data.

use crate::mesh::Marker;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VelocityRule {
    Free,
    Zero,
    Inflow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DisplacementRule {
    Free,
    Zero,
}

/// Dirichlet rules per boundary marker. Unlisted markers are natural
/// (do-nothing / traction-free). `Zero` wins over `Inflow` on shared nodes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BcSpec {
    pub velocity: Vec<(Marker, VelocityRule)>,
    pub displacement: Vec<(Marker, DisplacementRule)>,
    /// Pins the first pressure dof to zero (debugging aid).
    pub pin_pressure: bool,
}

impl BcSpec {
    /// Channel flow: parabolic inflow, no-slip walls and cylinder, free
    /// outflow; mesh displacement fixed on the whole outer boundary.
    pub fn channel() -> Self {
        use DisplacementRule as D;
        use VelocityRule as V;
        Self {
            velocity: vec![
                (Marker::Inflow, V::Inflow),
                (Marker::Wall, V::Zero),
                (Marker::Cylinder, V::Zero),
            ],
            displacement: vec![
                (Marker::Inflow, D::Zero),
                (Marker::Outflow, D::Zero),
                (Marker::Wall, D::Zero),
                (Marker::Cylinder, D::Zero),
            ],
            pin_pressure: false,
        }
    }

    pub fn markers(&self) -> impl Iterator<Item = Marker> + '_ {
        self.velocity
            .iter()
            .map(|r| r.0)
            .chain(self.displacement.iter().map(|r| r.0))
    }
}

/// Time dependence of the mean inflow velocity.
#[derive(Clone, Debug, PartialEq)]
pub enum MeanVelocity {
    /// `v·½(1 − cos(πt/t_ramp))` for `t < t_ramp`, then `v`.
    Ramped { value: f64, t_ramp: f64 },
    /// Piecewise linear through `(t, v)` samples, held constant outside.
    Table(Vec<(f64, f64)>),
}

impl MeanVelocity {
    pub fn constant(value: f64) -> Self {
        MeanVelocity::Ramped { value, t_ramp: 0.0 }
    }

    pub fn at(&self, t: f64) -> f64 {
        match self {
            MeanVelocity::Ramped { value, t_ramp } => {
                if *t_ramp > 0.0 && t < *t_ramp {
                    value * 0.5 * (1.0 - (std::f64::consts::PI * t / t_ramp).cos())
                } else {
                    *value
                }
            }
            MeanVelocity::Table(samples) => interpolate(samples, t),
        }
    }
}

fn interpolate(samples: &[(f64, f64)], t: f64) -> f64 {
    match samples {
        [] => 0.0,
        [only] => only.1,
        _ => {
            if t <= samples[0].0 {
                return samples[0].1;
            }
            for w in samples.windows(2) {
                let ((t0, v0), (t1, v1)) = (w[0], w[1]);
                if t <= t1 {
                    let s = if t1 > t0 { (t - t0) / (t1 - t0) } else { 1.0 };
                    return v0 + s * (v1 - v0);
                }
            }
            samples[samples.len() - 1].1
        }
    }
}

/// `v₁(y, t) = scale·(y − y0)(y1 − y)·4/(y1 − y0)²·v̄(t)`, `v₂ = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct InflowProfile {
    pub scale: f64,
    pub y0: f64,
    pub y1: f64,
    pub mean: MeanVelocity,
}

impl InflowProfile {
    pub fn none() -> Self {
        Self {
            scale: 0.0,
            y0: 0.0,
            y1: 1.0,
            mean: MeanVelocity::constant(0.0),
        }
    }

    pub fn value(&self, y: f64, t: f64) -> f64 {
        let h = self.y1 - self.y0;
        self.scale * (y - self.y0) * (self.y1 - y) * 4.0 / (h * h) * self.mean.at(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn benchmark_peak_inflow() {
        let p = InflowProfile {
            scale: 1.5,
            y0: 0.0,
            y1: 0.41,
            mean: MeanVelocity::constant(0.2),
        };
        assert!((p.value(0.205, 3.0) - 0.3).abs() < 1e-15);
        assert_eq!(p.value(0.0, 3.0), 0.0);
    }

    #[test]
    fn ramp_and_table() {
        let r = MeanVelocity::Ramped {
            value: 2.0,
            t_ramp: 2.0,
        };
        assert_eq!(r.at(0.0), 0.0);
        assert!((r.at(1.0) - 1.0).abs() < 1e-15);
        assert_eq!(r.at(5.0), 2.0);
        let t = MeanVelocity::Table(vec![(0.0, 0.0), (1.0, 4.0), (2.0, 0.0)]);
        assert_eq!(t.at(0.25), 1.0);
        assert_eq!(t.at(1.5), 2.0);
        assert_eq!(t.at(3.0), 0.0);
    }
}
