//! Global assembly of residuals, state Jacobians, cross-step operators and
//! control sensitivities.
//!
//! Every quantity is assembled from the same pointwise fluxes. Derivatives
//! are exact: the flux is evaluated with dual numbers seeded in one jet slot
//! at a time (or in μ/λ for the control), giving the 19×19 pointwise
//! linearization that is then contracted with trial and test functions.

use std::sync::Arc;

use super::kinematics::Degenerate;
use super::material::MaterialParams;
use super::pointwise::{
    fluid_flux, outflow_flux, solid_flux, Coefficients, Jet, Weights, P, SLOTS,
};
use crate::error::{Error, Result};
use crate::fem::element::{edge_point, Q2_NODES};
use crate::fem::{DofMap, LineRule, PointShape, QuadratureRule};
use crate::linalg::{SparseOperator, SparsityPattern};
use crate::mesh::{Marker, Mesh, Subdomain};
use crate::scalar::Dual;
use crate::tensor::Mat2;

/// Nonzero jet slots of one local basis function at one point.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Basis {
    slot: [u8; 3],
    val: [f64; 3],
    len: u8,
}

impl Basis {
    fn push(&mut self, slot: usize, val: f64) {
        self.slot[self.len as usize] = slot as u8;
        self.val[self.len as usize] = val;
        self.len += 1;
    }

    #[inline]
    pub(crate) fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.len as usize).map(|k| (self.slot[k] as usize, self.val[k]))
    }
}

#[derive(Clone, Copy, Debug)]
enum PointKind {
    Interior,
    Outflow([f64; 2]),
}

#[derive(Clone, Debug)]
struct IntegrationPoint {
    kind: PointKind,
    weight: f64,
    basis: Vec<Basis>,
}

#[derive(Clone, Debug)]
struct CellData {
    fluid: bool,
    tag: u32,
    dofs: Vec<usize>,
    /// Rows that receive this cell's contributions. Fluid cells do not test
    /// the displacement of nodes that belong to the solid.
    active: Vec<bool>,
    points: Vec<IntegrationPoint>,
    /// CSR positions of the dense local block, row-major.
    positions: Vec<usize>,
}

/// Which derivative to assemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Target {
    Residual,
    State,
    Previous,
    Control,
}

/// Precomputed geometry and connectivity for repeated assembly.
#[derive(Clone, Debug)]
pub struct Assembler {
    pub params: MaterialParams,
    pub pattern: Arc<SparsityPattern>,
    constrained: Vec<bool>,
    cells: Vec<CellData>,
    n: usize,
}

/// Local basis in [`DofMap::cell_dofs`] order.
pub(crate) fn basis_at(shape: &PointShape, fluid: bool) -> Vec<Basis> {
    let mut out = Vec::with_capacity(57);
    for block in 0..3 {
        let (vs, gs) = match block {
            0 => (super::pointwise::V, super::pointwise::GRAD_V),
            1 => (super::pointwise::U, super::pointwise::GRAD_U),
            _ => (super::pointwise::W, super::pointwise::GRAD_W),
        };
        for a in 0..Q2_NODES {
            for comp in 0..2 {
                let mut b = Basis::default();
                b.push(vs + comp, shape.values[a]);
                b.push(gs + 2 * comp, shape.gradients[a][0]);
                b.push(gs + 2 * comp + 1, shape.gradients[a][1]);
                out.push(b);
            }
        }
    }
    if fluid {
        for k in 0..3 {
            let mut b = Basis::default();
            b.push(P, shape.pressure[k]);
            out.push(b);
        }
    }
    out
}

/// Quadrature on local edge `e` of a cell: shape data, `ds` weight and the
/// outward unit normal of the cell.
pub(crate) fn facet_points(
    mesh: &Mesh,
    cell: usize,
    e: usize,
    line: &LineRule,
) -> Vec<(PointShape, f64, [f64; 2])> {
    let dir = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]][e];
    line.points
        .iter()
        .zip(&line.weights)
        .map(|(s, w)| {
            let r = edge_point(e, *s);
            let map = mesh.map_jacobian(cell, r[0], r[1]);
            let t = [
                map[(0, 0)] * dir[0] + map[(0, 1)] * dir[1],
                map[(1, 0)] * dir[0] + map[(1, 1)] * dir[1],
            ];
            let len = t[0].hypot(t[1]);
            (PointShape::new(map, r[0], r[1]), w * len, [t[1] / len, -t[0] / len])
        })
        .collect()
}

/// Pointwise state from local coefficients.
pub(crate) fn local_jet(basis: &[Basis], local: &[f64]) -> Jet<f64> {
    let mut j = Jet::zero();
    for (b, &x) in basis.iter().zip(local) {
        if x != 0.0 {
            for (s, v) in b.iter() {
                j.0[s] += v * x;
            }
        }
    }
    j
}

impl Assembler {
    /// `gauss` is the number of Gauss points per direction (cells and facets).
    pub fn new(mesh: &Mesh, dofmap: &DofMap, params: MaterialParams, gauss: usize) -> Self {
        let rule = QuadratureRule::gauss(gauss);
        let line = LineRule::gauss(gauss);
        let outflow = mesh.marked_facets(Marker::Outflow, Some(Subdomain::Fluid));
        let mut cells = Vec::with_capacity(mesh.num_cells());
        let u0 = dofmap.offset(crate::fem::Field::Displacement);
        let u1 = dofmap.offset(crate::fem::Field::Auxiliary);
        for c in 0..mesh.num_cells() {
            let fluid = mesh.subdomains[c] == Subdomain::Fluid;
            let dofs = dofmap.cell_dofs(c);
            let active = dofs
                .iter()
                .map(|&d| !(fluid && (u0..u1).contains(&d) && dofmap.touches_solid[(d - u0) / 2]))
                .collect();
            let mut points = Vec::with_capacity(rule.len());
            for (p, w) in rule.points.iter().zip(&rule.weights) {
                let map = mesh.map_jacobian(c, p[0], p[1]);
                let shape = PointShape::new(map, p[0], p[1]);
                points.push(IntegrationPoint {
                    kind: PointKind::Interior,
                    weight: w * map.det(),
                    basis: basis_at(&shape, fluid),
                });
            }
            for &(_, e) in outflow.iter().filter(|(fc, _)| *fc == c) {
                for (shape, weight, normal) in facet_points(mesh, c, e, &line) {
                    points.push(IntegrationPoint {
                        kind: PointKind::Outflow(normal),
                        weight,
                        basis: basis_at(&shape, fluid),
                    });
                }
            }
            cells.push(CellData {
                fluid,
                tag: mesh.cell_tags[c],
                dofs,
                active,
                points,
                positions: Vec::new(),
            });
        }
        let pattern = Arc::new(SparsityPattern::from_blocks(
            dofmap.len(),
            cells.iter().map(|c| c.dofs.as_slice()),
        ));
        for cd in &mut cells {
            let mut pos = Vec::with_capacity(cd.dofs.len() * cd.dofs.len());
            for &r in &cd.dofs {
                for &col in &cd.dofs {
                    pos.push(pattern.find(r, col).expect("pattern covers cell block"));
                }
            }
            cd.positions = pos;
        }
        Self {
            params,
            pattern,
            constrained: dofmap.constrained.clone(),
            cells,
            n: dofmap.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn constrained(&self) -> &[bool] {
        &self.constrained
    }

    fn coefficients<T: crate::Scalar>(&self, mu: T, lambda: T) -> Coefficients<T> {
        let p = &self.params;
        Coefficients {
            rho_f: p.rho_f,
            nu_f: p.nu_f,
            rho_s: p.rho_s,
            alpha: p.alpha_mesh,
            mu,
            lambda,
        }
    }

    fn jet(point: &IntegrationPoint, local: &[f64]) -> Jet<f64> {
        local_jet(&point.basis, local)
    }

    fn flux<T: crate::Scalar>(
        cd: &CellData,
        point: &IntegrationPoint,
        cur: &Jet<T>,
        old: &Jet<T>,
        w: &Weights,
        co: &Coefficients<T>,
    ) -> Result<Jet<T>, Degenerate> {
        match point.kind {
            PointKind::Interior if cd.fluid => fluid_flux(cur, old, w, co),
            PointKind::Interior => Ok(solid_flux(cur, old, w, co)),
            PointKind::Outflow(n) => outflow_flux(cur, old, n, w, co),
        }
    }

    fn gather(&self, cd: &CellData, state: &[f64]) -> Vec<f64> {
        cd.dofs.iter().map(|&d| state[d]).collect()
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Shared driver. Vector targets return `Some(vec)`; matrix targets fill
    /// `matrix`.
    fn run(
        &self,
        target: Target,
        u: &[f64],
        u_old: &[f64],
        q: f64,
        w: &Weights,
        mut matrix: Option<&mut SparseOperator>,
    ) -> Result<Vec<f64>> {
        self.check_len(u)?;
        self.check_len(u_old)?;
        let mut vec = vec![0.0; if matrix.is_some() { 0 } else { self.n }];
        let dlam = self.params.dlambda_dmu();
        let mut local_k: Vec<f64> = Vec::new();
        let mut d = [[0.0; SLOTS]; SLOTS];
        let mut e_buf: Vec<[f64; SLOTS]> = Vec::new();
        for (c, cd) in self.cells.iter().enumerate() {
            let nd = cd.dofs.len();
            let lu = self.gather(cd, u);
            let lo = self.gather(cd, u_old);
            let (mu, lambda) = self.params.lame(cd.tag, q);
            let co = self.coefficients(mu, lambda);
            let dmu = if self.params.in_control_region(cd.tag) { 1.0 } else { 0.0 };
            let co_d = self.coefficients(Dual::new(mu, dmu), Dual::new(lambda, dlam * dmu));
            let mut local_r = vec![0.0; nd];
            if matrix.is_some() {
                local_k.clear();
                local_k.resize(nd * nd, 0.0);
                e_buf.resize(nd, [0.0; SLOTS]);
            }
            let fail = |e: Degenerate| Error::MeshEntanglement {
                cell: c,
                jacobian: e.0,
            };
            for pt in &cd.points {
                let cur = Self::jet(pt, &lu);
                let old = Self::jet(pt, &lo);
                match target {
                    Target::Residual => {
                        let f = Self::flux(cd, pt, &cur, &old, w, &co).map_err(fail)?;
                        for (r, b) in pt.basis.iter().enumerate() {
                            local_r[r] += pt.weight * b.iter().map(|(s, v)| f.0[s] * v).sum::<f64>();
                        }
                    }
                    Target::Control => {
                        if !cd.fluid {
                            let f = Self::flux(
                                cd,
                                pt,
                                &cur.map(Dual::cst),
                                &old.map(Dual::cst),
                                w,
                                &co_d,
                            )
                            .map_err(fail)?;
                            for (r, b) in pt.basis.iter().enumerate() {
                                local_r[r] +=
                                    pt.weight * b.iter().map(|(s, v)| f.0[s].eps * v).sum::<f64>();
                            }
                        }
                    }
                    Target::State | Target::Previous => {
                        let co_c = self.coefficients(Dual::cst(mu), Dual::cst(lambda));
                        let (cd_cur, cd_old) = (cur.map(Dual::cst), old.map(Dual::cst));
                        let nslots = if cd.fluid { SLOTS } else { P };
                        for t in 0..nslots {
                            let (mut a, mut b) = (cd_cur, cd_old);
                            if target == Target::State {
                                a.0[t].eps = 1.0;
                            } else {
                                b.0[t].eps = 1.0;
                            }
                            let f = Self::flux(cd, pt, &a, &b, w, &co_c).map_err(fail)?;
                            for s in 0..SLOTS {
                                d[s][t] = f.0[s].eps;
                            }
                        }
                        // E = D·S for every trial function, then K += Tᵀ·E
                        for (col, bc) in pt.basis.iter().enumerate() {
                            let e = &mut e_buf[col];
                            for s in 0..SLOTS {
                                e[s] = bc.iter().map(|(t, v)| d[s][t] * v).sum();
                            }
                        }
                        for (r, br) in pt.basis.iter().enumerate() {
                            if !cd.active[r] {
                                continue;
                            }
                            let row = &mut local_k[r * nd..(r + 1) * nd];
                            for (col, e) in e_buf.iter().enumerate().take(nd) {
                                let mut acc = 0.0;
                                for (s, v) in br.iter() {
                                    acc += v * e[s];
                                }
                                row[col] += pt.weight * acc;
                            }
                        }
                    }
                }
            }
            match matrix.as_deref_mut() {
                Some(m) => {
                    for r in 0..nd {
                        if !cd.active[r] {
                            continue;
                        }
                        for col in 0..nd {
                            m.values[cd.positions[r * nd + col]] += local_k[r * nd + col];
                        }
                    }
                }
                None => {
                    for (r, &g) in cd.dofs.iter().enumerate() {
                        if cd.active[r] {
                            vec[g] += local_r[r];
                        }
                    }
                }
            }
        }
        Ok(vec)
    }

    /// Residual without constraint handling.
    pub fn residual_unconstrained(&self, u: &[f64], u_old: &[f64], q: f64, w: &Weights) -> Result<Vec<f64>> {
        self.run(Target::Residual, u, u_old, q, w, None)
    }

    /// Residual with constrained rows zeroed.
    pub fn residual(&self, u: &[f64], u_old: &[f64], q: f64, w: &Weights) -> Result<Vec<f64>> {
        let mut r = self.residual_unconstrained(u, u_old, q, w)?;
        self.zero_constrained(&mut r);
        Ok(r)
    }

    /// `∂R/∂U` without constraint handling.
    pub fn jacobian_unconstrained(&self, u: &[f64], u_old: &[f64], q: f64, w: &Weights) -> Result<SparseOperator> {
        let mut m = SparseOperator::zeros(self.pattern.clone());
        self.run(Target::State, u, u_old, q, w, Some(&mut m))?;
        Ok(m)
    }

    /// `∂R/∂U` with constrained rows and columns replaced by identity.
    pub fn jacobian(&self, u: &[f64], u_old: &[f64], q: f64, w: &Weights) -> Result<SparseOperator> {
        let mut m = self.jacobian_unconstrained(u, u_old, q, w)?;
        m.eliminate(&self.constrained);
        Ok(m)
    }

    /// `∂R/∂U_old` without constraint handling.
    pub fn cross_jacobian_unconstrained(
        &self,
        u: &[f64],
        u_old: &[f64],
        q: f64,
        w: &Weights,
    ) -> Result<SparseOperator> {
        let mut m = SparseOperator::zeros(self.pattern.clone());
        self.run(Target::Previous, u, u_old, q, w, Some(&mut m))?;
        Ok(m)
    }

    /// `∂R/∂U_old` with constrained rows and columns zeroed.
    pub fn cross_jacobian(&self, u: &[f64], u_old: &[f64], q: f64, w: &Weights) -> Result<SparseOperator> {
        let mut m = self.cross_jacobian_unconstrained(u, u_old, q, w)?;
        m.zero_rows_cols(&self.constrained);
        Ok(m)
    }

    /// `∂R/∂q` (constrained rows zeroed).
    pub fn control_derivative(&self, u: &[f64], u_old: &[f64], q: f64, w: &Weights) -> Result<Vec<f64>> {
        let mut r = self.run(Target::Control, u, u_old, q, w, None)?;
        self.zero_constrained(&mut r);
        Ok(r)
    }

    pub fn zero_constrained(&self, v: &mut [f64]) {
        for (x, &c) in v.iter_mut().zip(&self.constrained) {
            if c {
                *x = 0.0;
            }
        }
    }

    /// Smallest `J = det(I + ∇u)` over all interior quadrature points, with
    /// the cell where it occurs.
    pub fn min_jacobian(&self, u: &[f64]) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for (c, cd) in self.cells.iter().enumerate() {
            let lu = self.gather(cd, u);
            for pt in cd.points.iter().filter(|p| matches!(p.kind, PointKind::Interior)) {
                let jet = Self::jet(pt, &lu);
                let j = (Mat2::identity() + jet.mat(super::pointwise::GRAD_U)).det();
                if j < best.0 {
                    best = (j, c);
                }
            }
        }
        best
    }
}
