//! End-time cost functionals with Tikhonov regularization.

use crate::error::{Error, Result};
use crate::fem::{apply_row, DofMap, Field, LineRule, PointLocation};
use crate::forms::assembly::{basis_at, facet_points, local_jet, Basis};
use crate::forms::pointwise::{Jet, GRAD_U, GRAD_V, P, SLOTS};
use crate::forms::{kinematics, MaterialParams};
use crate::mesh::{Marker, Mesh, Subdomain};
use crate::scalar::{Dual, Scalar};
use crate::tensor::{Mat2, Vec2};

#[derive(Clone, Debug, PartialEq)]
pub enum FunctionalKind {
    /// `½(u₁(A, T) − u_d)²`.
    TipTracking { point: [f64; 2], target: f64 },
    /// x-component of the fluid force on the solid along `marker` at `T`.
    Drag { marker: Marker },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CostFunctional {
    pub kind: FunctionalKind,
    pub alpha: f64,
    pub q_d: f64,
}

impl CostFunctional {
    pub fn regularization(&self, q: f64) -> f64 {
        0.5 * self.alpha * (q - self.q_d).powi(2)
    }

    /// `∂_q` of the regularization term.
    pub fn control_derivative(&self, q: f64) -> f64 {
        self.alpha * (q - self.q_d)
    }
}

#[derive(Clone, Debug)]
struct DragPoint {
    cell: usize,
    dofs: Vec<usize>,
    basis: Vec<Basis>,
    weight: f64,
    /// Normal pointing out of the solid (into the fluid cell).
    normal: [f64; 2],
}

#[derive(Clone, Debug)]
enum Prepared {
    Point { row: Vec<(usize, f64)>, target: f64 },
    Drag { points: Vec<DragPoint>, rho_nu: f64 },
}

/// A functional bound to a mesh and dof layout.
#[derive(Clone, Debug)]
pub struct BoundFunctional {
    pub spec: CostFunctional,
    prepared: Prepared,
    n: usize,
}

/// `e₁·(J σ F⁻ᵀ n)` at one boundary point.
fn traction_x<T: Scalar>(jet: &Jet<T>, normal: [f64; 2], rho_nu: f64) -> Option<T> {
    let kin = kinematics(jet.mat(GRAD_U)).ok()?;
    let gv = jet.mat(GRAD_V);
    let sigma = (gv * kin.f_inv + kin.f_inv_t * gv.transpose()).scale(T::constant(rho_nu))
        - Mat2::identity().scale(jet.0[P]);
    let n = Vec2([T::constant(normal[0]), T::constant(normal[1])]);
    Some((sigma * kin.f_inv_t).mul_vec(&n)[0] * kin.j)
}

impl BoundFunctional {
    pub fn new(spec: &CostFunctional, mesh: &Mesh, dofmap: &DofMap, params: &MaterialParams) -> Result<Self> {
        if !(spec.alpha >= 0.0) {
            return Err(Error::Config(format!("functional.alpha must be >= 0, got {}", spec.alpha)));
        }
        let prepared = match &spec.kind {
            FunctionalKind::TipTracking { point, target } => {
                let loc = PointLocation::find(mesh, *point, Some(Subdomain::Solid))?;
                if mesh.subdomains[loc.cell] != Subdomain::Solid {
                    return Err(Error::Config(format!(
                        "tracking point ({}, {}) is not in the solid",
                        point[0], point[1]
                    )));
                }
                Prepared::Point {
                    row: loc.row(dofmap, Field::Displacement, 0),
                    target: *target,
                }
            }
            FunctionalKind::Drag { marker } => {
                let facets = mesh.marked_facets(*marker, Some(Subdomain::Fluid));
                if facets.is_empty() {
                    return Err(Error::UnknownMarker(marker.name().to_string()));
                }
                let line = LineRule::gauss(3);
                let mut points = Vec::new();
                for (c, e) in facets {
                    let dofs = dofmap.cell_dofs(c);
                    for (shape, weight, n) in facet_points(mesh, c, e, &line) {
                        points.push(DragPoint {
                            cell: c,
                            dofs: dofs.clone(),
                            basis: basis_at(&shape, true),
                            weight,
                            normal: [-n[0], -n[1]],
                        });
                    }
                }
                Prepared::Drag {
                    points,
                    rho_nu: params.rho_f * params.nu_f,
                }
            }
        };
        Ok(Self {
            spec: spec.clone(),
            prepared,
            n: dofmap.len(),
        })
    }

    /// State part of the functional at the final state.
    pub fn state_term(&self, u: &[f64]) -> Result<f64> {
        match &self.prepared {
            Prepared::Point { row, target } => Ok(0.5 * (apply_row(row, u) - target).powi(2)),
            Prepared::Drag { .. } => self.drag(u),
        }
    }

    /// `∫ e₁·(J σ F⁻ᵀ n) ds` (drag functionals only).
    pub fn drag(&self, u: &[f64]) -> Result<f64> {
        let Prepared::Drag { points, rho_nu } = &self.prepared else {
            return Err(Error::Config("not a drag functional".into()));
        };
        let mut total = 0.0;
        for p in points {
            let local: Vec<f64> = p.dofs.iter().map(|&d| u[d]).collect();
            let jet = local_jet(&p.basis, &local);
            total += p.weight * traction_x(&jet, p.normal, *rho_nu).ok_or_else(|| degenerate(p.cell))?;
        }
        Ok(total)
    }

    /// Value of the functional: tip displacement for tracking, drag for
    /// drag functionals. Used for output series.
    pub fn observation(&self, u: &[f64]) -> Result<f64> {
        match &self.prepared {
            Prepared::Point { row, .. } => Ok(apply_row(row, u)),
            Prepared::Drag { .. } => self.drag(u),
        }
    }

    pub fn value(&self, u_final: &[f64], q: f64) -> Result<f64> {
        Ok(self.state_term(u_final)? + self.spec.regularization(q))
    }

    /// `∂J/∂U^N` as a dense vector.
    pub fn state_derivative(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut g = vec![0.0; self.n];
        match &self.prepared {
            Prepared::Point { row, target } => {
                let r = apply_row(row, u) - target;
                for &(d, w) in row {
                    g[d] += r * w;
                }
            }
            Prepared::Drag { points, rho_nu } => {
                for p in points {
                    let local: Vec<f64> = p.dofs.iter().map(|&d| u[d]).collect();
                    let jet = local_jet(&p.basis, &local).map(Dual::cst);
                    let mut dg = [0.0; SLOTS];
                    for (s, slot) in dg.iter_mut().enumerate() {
                        let mut seeded = jet;
                        seeded.0[s].eps = 1.0;
                        *slot = traction_x(&seeded, p.normal, *rho_nu).ok_or_else(|| degenerate(p.cell))?.eps;
                    }
                    for (b, &d) in p.basis.iter().zip(&p.dofs) {
                        g[d] += p.weight * b.iter().map(|(s, v)| dg[s] * v).sum::<f64>();
                    }
                }
            }
        }
        Ok(g)
    }

    pub fn control_derivative(&self, q: f64) -> f64 {
        self.spec.control_derivative(q)
    }
}

fn degenerate(cell: usize) -> Error {
    Error::MeshEntanglement { cell, jacobian: 0.0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::BcSpec;
    use crate::forms::{ControlMode, ControlRegion};
    use crate::mesh::{flapping_mesh, fsi_benchmark_mesh, FlappingGeometry, BENCHMARK_TIP};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params() -> MaterialParams {
        MaterialParams {
            rho_f: 1e2,
            nu_f: 0.1,
            rho_s: 1e2,
            mu: 1e9,
            lambda: 0.0,
            nu_s: 0.4,
            alpha_mesh: 1e-5,
            control_mode: ControlMode::PoissonLocked,
            control_region: ControlRegion::Tagged,
        }
    }

    fn tracking(target: f64, alpha: f64) -> CostFunctional {
        CostFunctional {
            kind: FunctionalKind::TipTracking {
                point: BENCHMARK_TIP,
                target,
            },
            alpha,
            q_d: 5e5,
        }
    }

    #[test]
    fn regularization_hand_values() {
        let f = tracking(0.0, 1.0);
        assert!((f.regularization(5000.0) - 1.225125e11).abs() < 1.0);
        assert_eq!(f.control_derivative(5000.0), -495000.0);
        assert_eq!(f.control_derivative(5e5), 0.0);
        assert_eq!(tracking(0.0, 0.0).control_derivative(123.0), 0.0);
    }

    #[test]
    fn tracking_value_and_derivative() {
        let mesh = fsi_benchmark_mesh(0);
        let dm = DofMap::new(&mesh, &BcSpec::channel()).unwrap();
        let mut u = vec![0.0; dm.len()];
        for (n, x) in dm.node_coords.iter().enumerate() {
            u[dm.dof(Field::Displacement, n, 0)] = 1e-3 * (x[0] - 0.2);
        }
        let f = BoundFunctional::new(&tracking(4e-4, 1.0), &mesh, &dm, &params()).unwrap();
        assert!((f.observation(&u).unwrap() - 4e-4).abs() < 1e-15);
        assert!(f.value(&u, 5e5).unwrap().abs() < 1e-25);
        assert!(f.state_derivative(&u).unwrap().iter().all(|v| v.abs() < 1e-18));

        let f = BoundFunctional::new(&tracking(1e-4, 1.0), &mesh, &dm, &params()).unwrap();
        let g1 = f.state_derivative(&u).unwrap();
        let f2 = BoundFunctional::new(&tracking(-2e-4, 1.0), &mesh, &dm, &params()).unwrap();
        let g2 = f2.state_derivative(&u).unwrap();
        for (a, b) in g1.iter().zip(&g2) {
            assert!((2.0 * a - b).abs() < 1e-18);
        }
    }

    #[test]
    fn tracking_point_must_be_in_solid() {
        let mesh = fsi_benchmark_mesh(0);
        let dm = DofMap::new(&mesh, &BcSpec::channel()).unwrap();
        let mut spec = tracking(0.0, 1.0);
        spec.kind = FunctionalKind::TipTracking {
            point: [1.5, 0.2],
            target: 0.0,
        };
        assert!(BoundFunctional::new(&spec, &mesh, &dm, &params()).is_err());
    }

    fn drag_setup() -> (Mesh, DofMap, BoundFunctional) {
        let mesh = flapping_mesh(0, FlappingGeometry::default());
        let dm = DofMap::new(&mesh, &BcSpec::default()).unwrap();
        let spec = CostFunctional {
            kind: FunctionalKind::Drag {
                marker: Marker::DragBoundary,
            },
            alpha: 1.0,
            q_d: 5e6,
        };
        let f = BoundFunctional::new(&spec, &mesh, &dm, &params()).unwrap();
        (mesh, dm, f)
    }

    #[test]
    fn quiescent_pressure_gives_no_drag_on_flat_boundary() {
        let (_, dm, f) = drag_setup();
        let mut u = vec![0.0; dm.len()];
        let p0 = dm.offset(Field::Pressure);
        for c in 0..dm.num_fluid_cells {
            u[p0 + 3 * c] = 7.5;
        }
        assert!(f.drag(&u).unwrap().abs() < 1e-12);
    }

    #[test]
    fn shear_flow_drag_hand_value() {
        // v₁ = y above the boundary: wall shear ρν·∂v₁/∂y along the strip,
        // acting on the solid in +x; the boundary spans 2 ≤ x ≤ 8
        let (_, dm, f) = drag_setup();
        let mut u = vec![0.0; dm.len()];
        for (n, x) in dm.node_coords.iter().enumerate() {
            u[dm.dof(Field::Velocity, n, 0)] = x[1];
        }
        let expected = 1e2 * 0.1 * 6.0;
        assert!((f.drag(&u).unwrap() - expected).abs() < 1e-10, "{}", f.drag(&u).unwrap());
    }

    #[test]
    fn drag_derivative_matches_central_differences() {
        let (_, dm, f) = drag_setup();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u: Vec<f64> = (0..dm.len()).map(|_| rng.gen_range(-2e-3..2e-3)).collect();
        let g = f.state_derivative(&u).unwrap();
        for _ in 0..5 {
            let d: Vec<f64> = (0..dm.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let h = 1e-6;
            let shift = |s: f64| -> Vec<f64> { u.iter().zip(&d).map(|(a, b)| a + s * b).collect() };
            let fd = (f.drag(&shift(h)).unwrap() - f.drag(&shift(-h)).unwrap()) / (2.0 * h);
            let an: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
            assert!((fd - an).abs() <= 1e-6 * an.abs().max(1e-3), "{fd} vs {an}");
        }
    }
}
