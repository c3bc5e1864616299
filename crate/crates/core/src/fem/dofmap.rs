//! Global numbering of the mixed space (v, u, w, p).
//!
//! Unknowns are stored field by field: `[v | u | w | p]`. Within a Q2
//! vector field dof `2·node + component`; nodes are numbered vertices first,
//! then edge midpoints, then cell centers. Pressure has three dofs per fluid
//! cell, in fluid-cell order.

use std::collections::BTreeSet;

use super::bc::{BcSpec, DisplacementRule, InflowProfile, VelocityRule};
use super::element::{edge_nodes, Q2_NODES, Q2_NODE_COORDS};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Subdomain, CELL_EDGES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    Velocity,
    Displacement,
    Auxiliary,
    Pressure,
}

/// Prescribed value of a constrained dof.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundaryValue {
    Zero,
    /// x-velocity from the inflow profile at height `y`.
    Inflow { y: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constraint {
    pub dof: usize,
    pub value: BoundaryValue,
}

#[derive(Clone, Debug)]
pub struct DofMap {
    pub num_nodes: usize,
    pub cell_nodes: Vec<[usize; Q2_NODES]>,
    pub node_coords: Vec<[f64; 2]>,
    /// Index among fluid cells, `None` for solid cells.
    pub fluid_index: Vec<Option<usize>>,
    pub num_fluid_cells: usize,
    /// Sorted by dof, each dof at most once.
    pub constraints: Vec<Constraint>,
    pub constrained: Vec<bool>,
    /// Nodes belonging to at least one solid cell; their displacement rows
    /// carry the solid equation instead of mesh motion.
    pub touches_solid: Vec<bool>,
    pub subdomains: Vec<Subdomain>,
}

impl DofMap {
    pub fn new(mesh: &Mesh, bc: &BcSpec) -> Result<Self> {
        for m in bc.markers() {
            if !mesh.uses_marker(m) {
                return Err(Error::UnknownMarker(m.name().to_string()));
            }
        }
        let topo = mesh.topology();
        let nv = mesh.num_vertices();
        let ne = topo.edges.len();
        let num_nodes = nv + ne + mesh.num_cells();
        let mut cell_nodes = Vec::with_capacity(mesh.num_cells());
        let mut node_coords = vec![[0.0; 2]; num_nodes];
        let mut touches_solid = vec![false; num_nodes];
        for (c, cell) in mesh.cells.iter().enumerate() {
            let e = topo.cell_edges[c];
            let nodes = [
                cell[0],
                cell[1],
                cell[2],
                cell[3],
                nv + e[0],
                nv + e[1],
                nv + e[2],
                nv + e[3],
                nv + ne + c,
            ];
            for (a, &n) in nodes.iter().enumerate() {
                let r = Q2_NODE_COORDS[a];
                node_coords[n] = mesh.map_point(c, r[0], r[1]);
                if mesh.subdomains[c] == Subdomain::Solid {
                    touches_solid[n] = true;
                }
            }
            cell_nodes.push(nodes);
        }
        // vertices keep their exact coordinates (snapped circle points)
        node_coords[..nv].copy_from_slice(&mesh.vertices);

        let mut fluid_index = Vec::with_capacity(mesh.num_cells());
        let mut nf = 0;
        for s in &mesh.subdomains {
            if *s == Subdomain::Fluid {
                fluid_index.push(Some(nf));
                nf += 1;
            } else {
                fluid_index.push(None);
            }
        }

        // strongest rule per node: Zero > Inflow > Free
        let mut vel: Vec<Option<VelocityRule>> = vec![None; num_nodes];
        let mut disp = vec![false; num_nodes];
        for (c, cell) in mesh.cells.iter().enumerate() {
            for (e, &(i, j)) in CELL_EDGES.iter().enumerate() {
                let Some(set) = mesh.markers(cell[i], cell[j]) else {
                    continue;
                };
                for a in edge_nodes(e) {
                    let n = cell_nodes[c][a];
                    for &(m, rule) in &bc.velocity {
                        if !set.contains(&m) || rule == VelocityRule::Free {
                            continue;
                        }
                        vel[n] = Some(match (vel[n], rule) {
                            (Some(VelocityRule::Zero), _) | (_, VelocityRule::Zero) => {
                                VelocityRule::Zero
                            }
                            _ => VelocityRule::Inflow,
                        });
                    }
                    for &(m, rule) in &bc.displacement {
                        if set.contains(&m) && rule == DisplacementRule::Zero {
                            disp[n] = true;
                        }
                    }
                }
            }
        }

        let mut map = Self {
            num_nodes,
            cell_nodes,
            node_coords,
            fluid_index,
            num_fluid_cells: nf,
            constraints: Vec::new(),
            constrained: Vec::new(),
            touches_solid,
            subdomains: mesh.subdomains.clone(),
        };
        // a clamped solid node is at rest: v = ∂ₜu there
        for n in 0..num_nodes {
            if disp[n] && map.touches_solid[n] {
                vel[n] = Some(VelocityRule::Zero);
            }
        }
        let mut set = BTreeSet::new();
        let mut constraints = Vec::new();
        for n in 0..num_nodes {
            if let Some(rule) = vel[n] {
                let x = if rule == VelocityRule::Inflow && !map.touches_solid[n] {
                    BoundaryValue::Inflow {
                        y: map.node_coords[n][1],
                    }
                } else {
                    BoundaryValue::Zero
                };
                constraints.push(Constraint {
                    dof: map.dof(Field::Velocity, n, 0),
                    value: x,
                });
                constraints.push(Constraint {
                    dof: map.dof(Field::Velocity, n, 1),
                    value: BoundaryValue::Zero,
                });
            }
            if disp[n] {
                for comp in 0..2 {
                    constraints.push(Constraint {
                        dof: map.dof(Field::Displacement, n, comp),
                        value: BoundaryValue::Zero,
                    });
                }
            }
        }
        if bc.pin_pressure && nf > 0 {
            constraints.push(Constraint {
                dof: map.offset(Field::Pressure),
                value: BoundaryValue::Zero,
            });
        }
        constraints.sort_by_key(|c| c.dof);
        constraints.retain(|c| set.insert(c.dof));
        let mut constrained = vec![false; map.len()];
        for c in &constraints {
            constrained[c.dof] = true;
        }
        map.constraints = constraints;
        map.constrained = constrained;
        Ok(map)
    }

    /// Total number of unknowns.
    pub fn len(&self) -> usize {
        6 * self.num_nodes + 3 * self.num_fluid_cells
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_cells(&self) -> usize {
        self.cell_nodes.len()
    }

    pub fn field_len(&self, field: Field) -> usize {
        match field {
            Field::Pressure => 3 * self.num_fluid_cells,
            _ => 2 * self.num_nodes,
        }
    }

    pub fn offset(&self, field: Field) -> usize {
        match field {
            Field::Velocity => 0,
            Field::Displacement => 2 * self.num_nodes,
            Field::Auxiliary => 4 * self.num_nodes,
            Field::Pressure => 6 * self.num_nodes,
        }
    }

    #[inline]
    pub fn dof(&self, field: Field, node: usize, comp: usize) -> usize {
        debug_assert!(field != Field::Pressure);
        self.offset(field) + 2 * node + comp
    }

    pub fn pressure_dofs(&self, cell: usize) -> Option<[usize; 3]> {
        let f = self.fluid_index[cell]?;
        let o = self.offset(Field::Pressure) + 3 * f;
        Some([o, o + 1, o + 2])
    }

    /// Local-to-global map: 18 velocity, 18 displacement, 18 auxiliary and,
    /// on fluid cells, 3 pressure dofs. Vector dofs are node-major.
    pub fn cell_dofs(&self, cell: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(57);
        for field in [Field::Velocity, Field::Displacement, Field::Auxiliary] {
            for &n in &self.cell_nodes[cell] {
                out.push(self.dof(field, n, 0));
                out.push(self.dof(field, n, 1));
            }
        }
        if let Some(p) = self.pressure_dofs(cell) {
            out.extend_from_slice(&p);
        }
        out
    }

    /// Prescribed `(dof, value)` pairs at time `t`.
    pub fn boundary_values(&self, inflow: &InflowProfile, t: f64) -> Vec<(usize, f64)> {
        self.constraints
            .iter()
            .map(|c| {
                let v = match c.value {
                    BoundaryValue::Zero => 0.0,
                    BoundaryValue::Inflow { y } => inflow.value(y, t),
                };
                (c.dof, v)
            })
            .collect()
    }

    /// Overwrites the constrained entries of `state` with their values at `t`.
    pub fn impose(&self, state: &mut [f64], inflow: &InflowProfile, t: f64) {
        for (d, v) in self.boundary_values(inflow, t) {
            state[d] = v;
        }
    }

    /// Sets constrained entries to zero (homogeneous data for increments,
    /// residual rows and adjoint right-hand sides).
    pub fn zero_constrained(&self, v: &mut [f64]) {
        for c in &self.constraints {
            v[c.dof] = 0.0;
        }
    }

    pub fn field<'a>(&self, state: &'a [f64], field: Field) -> &'a [f64] {
        let o = self.offset(field);
        &state[o..o + self.field_len(field)]
    }
}
