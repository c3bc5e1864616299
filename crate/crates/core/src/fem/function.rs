//! Finite element functions and point evaluation.

use super::dofmap::{DofMap, Field};
use super::element::{p1_values, q2_values, Q2_NODES};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Subdomain};

/// Coefficients of one field, aligned with the field block of a [`DofMap`].
#[derive(Clone, Debug, PartialEq)]
pub struct FeFunction {
    pub field: Field,
    pub values: Vec<f64>,
}

/// A located point: the cell containing it and the shape-function weights.
#[derive(Clone, Debug, PartialEq)]
pub struct PointLocation {
    pub cell: usize,
    pub reference: [f64; 2],
    pub q2: [f64; Q2_NODES],
    pub p1: [f64; 3],
}

impl PointLocation {
    /// Finds `x` in the mesh. Ties on shared facets go to `prefer` cells.
    pub fn find(mesh: &Mesh, x: [f64; 2], prefer: Option<Subdomain>) -> Result<Self> {
        let (cell, r) = mesh
            .locate(x, prefer)
            .ok_or(Error::PointOutside { x: x[0], y: x[1] })?;
        Ok(Self {
            cell,
            reference: r,
            q2: q2_values(r[0], r[1]),
            p1: p1_values(r[0], r[1]),
        })
    }

    /// Sparse row `r` with `r·U` equal to component `comp` of `field` at the
    /// point (`comp` is ignored for pressure).
    pub fn row(&self, dofmap: &DofMap, field: Field, comp: usize) -> Vec<(usize, f64)> {
        match field {
            Field::Pressure => match dofmap.pressure_dofs(self.cell) {
                Some(p) => p.iter().copied().zip(self.p1).collect(),
                None => Vec::new(),
            },
            _ => dofmap.cell_nodes[self.cell]
                .iter()
                .zip(self.q2)
                .map(|(&n, w)| (dofmap.dof(field, n, comp), w))
                .collect(),
        }
    }
}

/// Applies a sparse row to a coefficient vector.
pub fn apply_row(row: &[(usize, f64)], coeffs: &[f64]) -> f64 {
    row.iter().map(|&(i, w)| w * coeffs[i]).sum()
}

impl FeFunction {
    pub fn zeros(dofmap: &DofMap, field: Field) -> Self {
        Self {
            field,
            values: vec![0.0; dofmap.field_len(field)],
        }
    }

    /// Copies the `field` block out of a monolithic state.
    pub fn extract(dofmap: &DofMap, state: &[f64], field: Field) -> Self {
        Self {
            field,
            values: dofmap.field(state, field).to_vec(),
        }
    }

    /// Interpolates `f` at the Q2 nodes (vector fields only).
    pub fn interpolate(dofmap: &DofMap, field: Field, f: impl Fn([f64; 2]) -> [f64; 2]) -> Self {
        assert!(field != Field::Pressure, "pressure is not nodal");
        let mut values = vec![0.0; dofmap.field_len(field)];
        for (n, x) in dofmap.node_coords.iter().enumerate() {
            let v = f(*x);
            values[2 * n] = v[0];
            values[2 * n + 1] = v[1];
        }
        Self { field, values }
    }

    /// Value at `x`; pressure returns `[p, 0]`.
    pub fn evaluate_at_point(&self, dofmap: &DofMap, mesh: &Mesh, x: [f64; 2]) -> Result<[f64; 2]> {
        let prefer = match self.field {
            Field::Pressure => Some(Subdomain::Fluid),
            _ => None,
        };
        let loc = PointLocation::find(mesh, x, prefer)?;
        Ok(self.evaluate_at(dofmap, &loc))
    }

    pub fn evaluate_at(&self, dofmap: &DofMap, loc: &PointLocation) -> [f64; 2] {
        let shift = dofmap.offset(self.field);
        let local = |row: Vec<(usize, f64)>| -> f64 {
            row.iter().map(|&(i, w)| w * self.values[i - shift]).sum()
        };
        match self.field {
            Field::Pressure => [local(loc.row(dofmap, Field::Pressure, 0)), 0.0],
            f => [local(loc.row(dofmap, f, 0)), local(loc.row(dofmap, f, 1))],
        }
    }
}
