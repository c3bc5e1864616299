//! Point-value CSV series and legacy VTK snapshots.

use std::io::Write;

use crate::error::Result;
use crate::fem::{apply_row, DofMap, Field, PointLocation};
use crate::fem::element::p1_values;
use crate::forms::MaterialParams;
use crate::functionals::{BoundFunctional, CostFunctional, FunctionalKind};
use crate::mesh::{Marker, Mesh, Subdomain};

/// What a forward run records.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputSpec {
    /// Probe point `A` for the displacement columns.
    pub point: [f64; 2],
    /// Facets whose fluid-side traction is summed into the drag column.
    /// Empty means no drag column values (`NaN`).
    pub drag: Vec<Marker>,
    /// Write a VTK snapshot every `vtk_every` steps; 0 disables snapshots.
    pub vtk_every: usize,
}

pub const POINT_CSV_HEADER: &str = "t,u1_A,u2_A,drag";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointSample {
    pub t: f64,
    pub u1: f64,
    pub u2: f64,
    pub drag: f64,
}

impl PointSample {
    pub fn csv_row(&self) -> String {
        format!("{:e},{:e},{:e},{:e}", self.t, self.u1, self.u2, self.drag)
    }
}

/// Evaluates the point-value columns on states of one problem.
pub struct Probe {
    rows: [Vec<(usize, f64)>; 2],
    drag: Vec<BoundFunctional>,
}

impl Probe {
    pub fn new(mesh: &Mesh, dofmap: &DofMap, params: &MaterialParams, spec: &OutputSpec) -> Result<Self> {
        let loc = PointLocation::find(mesh, spec.point, Some(Subdomain::Solid))?;
        let drag = spec
            .drag
            .iter()
            .map(|&marker| {
                let f = CostFunctional {
                    kind: FunctionalKind::Drag { marker },
                    alpha: 0.0,
                    q_d: 0.0,
                };
                BoundFunctional::new(&f, mesh, dofmap, params)
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            rows: [
                loc.row(dofmap, Field::Displacement, 0),
                loc.row(dofmap, Field::Displacement, 1),
            ],
            drag,
        })
    }

    pub fn sample(&self, t: f64, state: &[f64]) -> Result<PointSample> {
        let drag = if self.drag.is_empty() {
            f64::NAN
        } else {
            let mut d = 0.0;
            for f in &self.drag {
                d += f.drag(state)?;
            }
            d
        };
        Ok(PointSample {
            t,
            u1: apply_row(&self.rows[0], state),
            u2: apply_row(&self.rows[1], state),
            drag,
        })
    }
}

/// Legacy ASCII VTK unstructured grid in the deformed configuration
/// `x + u`, with vertex fields `velocity`, `displacement`, `pressure` and
/// a `subdomain` cell field (0 fluid, 1 solid).
///
/// Pressure is discontinuous; a vertex gets the mean of the adjacent fluid
/// cells' values there, and 0 if it touches no fluid cell.
pub fn write_vtk(w: &mut impl Write, mesh: &Mesh, dofmap: &DofMap, state: &[f64], title: &str) -> Result<()> {
    let nv = mesh.num_vertices();
    let value = |f: Field, n: usize, c: usize| state[dofmap.dof(f, n, c)];
    let mut pressure = vec![0.0; nv];
    let mut count = vec![0usize; nv];
    const CORNERS: [[f64; 2]; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    for (c, cell) in mesh.cells.iter().enumerate() {
        let Some(p) = dofmap.pressure_dofs(c) else {
            continue;
        };
        for (a, &v) in cell.iter().enumerate() {
            let phi = p1_values(CORNERS[a][0], CORNERS[a][1]);
            pressure[v] += (0..3).map(|i| phi[i] * state[p[i]]).sum::<f64>();
            count[v] += 1;
        }
    }
    for (p, &k) in pressure.iter_mut().zip(&count) {
        if k > 0 {
            *p /= k as f64;
        }
    }

    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{}", title.replace('\n', " "))?;
    writeln!(w, "ASCII\nDATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {nv} double")?;
    for (n, x) in mesh.vertices.iter().enumerate() {
        let u = [value(Field::Displacement, n, 0), value(Field::Displacement, n, 1)];
        writeln!(w, "{:e} {:e} 0", x[0] + u[0], x[1] + u[1])?;
    }
    let nc = mesh.num_cells();
    writeln!(w, "CELLS {nc} {}", 5 * nc)?;
    for cell in &mesh.cells {
        writeln!(w, "4 {} {} {} {}", cell[0], cell[1], cell[2], cell[3])?;
    }
    writeln!(w, "CELL_TYPES {nc}")?;
    for _ in 0..nc {
        writeln!(w, "9")?;
    }
    writeln!(w, "CELL_DATA {nc}\nSCALARS subdomain int 1\nLOOKUP_TABLE default")?;
    for s in &mesh.subdomains {
        writeln!(w, "{}", (*s == Subdomain::Solid) as u8)?;
    }
    writeln!(w, "POINT_DATA {nv}")?;
    for (name, field) in [("velocity", Field::Velocity), ("displacement", Field::Displacement)] {
        writeln!(w, "VECTORS {name} double")?;
        for n in 0..nv {
            writeln!(w, "{:e} {:e} 0", value(field, n, 0), value(field, n, 1))?;
        }
    }
    writeln!(w, "SCALARS pressure double 1\nLOOKUP_TABLE default")?;
    for p in &pressure {
        writeln!(w, "{p:e}")?;
    }
    Ok(())
}
