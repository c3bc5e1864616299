//! Plain-text mesh format.
//!
//! ```text
//! # comments and blank lines are ignored
//! refinement 0
//! vertices 4
//! 0 0
//! 1 0
//! 1 1
//! 0 1
//! cells 1
//! 0 1 2 3 fluid 0
//! facets 1
//! 0 1 wall
//! curves 0
//! ```
//!
//! A facet line may list several markers. A curve line is
//! `marker cx cy r`: vertices created on facets carrying `marker` are
//! snapped to that circle on refinement. The `facets` and `curves`
//! sections are optional.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Circle, FacetKey, Marker, Mesh, Subdomain};
use crate::error::{Error, Result};

impl Mesh {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "refinement {}", self.refinement_level);
        let _ = writeln!(s, "vertices {}", self.vertices.len());
        for v in &self.vertices {
            let _ = writeln!(s, "{} {}", v[0], v[1]);
        }
        let _ = writeln!(s, "cells {}", self.cells.len());
        for (c, cell) in self.cells.iter().enumerate() {
            let sub = match self.subdomains[c] {
                Subdomain::Fluid => "fluid",
                Subdomain::Solid => "solid",
            };
            let _ = writeln!(
                s,
                "{} {} {} {} {sub} {}",
                cell[0], cell[1], cell[2], cell[3], self.cell_tags[c]
            );
        }
        let _ = writeln!(s, "facets {}", self.facet_markers.len());
        for (k, set) in &self.facet_markers {
            let names: Vec<&str> = set.iter().map(|m| m.name()).collect();
            let _ = writeln!(s, "{} {} {}", k.0, k.1, names.join(" "));
        }
        let _ = writeln!(s, "curves {}", self.curves.len());
        for (m, c) in &self.curves {
            let _ = writeln!(s, "{m} {} {} {}", c.center[0], c.center[1], c.radius);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Mesh> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty())
            .peekable();
        let mut mesh = Mesh {
            vertices: vec![],
            cells: vec![],
            subdomains: vec![],
            cell_tags: vec![],
            facet_markers: BTreeMap::new(),
            refinement_level: 0,
            curves: vec![],
        };
        let fail = |line: usize, message: String| Error::MeshFormat { line, message };
        let mut seen_vertices = false;
        let mut seen_cells = false;
        while let Some((ln, line)) = lines.next() {
            let mut head = line.split_whitespace();
            let key = head.next().unwrap_or_default();
            let count: usize = head
                .next()
                .ok_or_else(|| fail(ln, format!("`{key}` needs a count")))?
                .parse()
                .map_err(|e| fail(ln, format!("bad count: {e}")))?;
            if key == "refinement" {
                mesh.refinement_level = count;
                continue;
            }
            let mut rows = Vec::with_capacity(count);
            for _ in 0..count {
                let (l, body) = lines
                    .next()
                    .ok_or_else(|| fail(ln, format!("`{key}` section ends early")))?;
                rows.push((l, body.split_whitespace().collect::<Vec<_>>()));
            }
            match key {
                "vertices" => {
                    seen_vertices = true;
                    for (l, f) in rows {
                        if f.len() != 2 {
                            return Err(fail(l, "vertex needs 2 coordinates".into()));
                        }
                        let x = parse_f(l, f[0])?;
                        let y = parse_f(l, f[1])?;
                        mesh.vertices.push([x, y]);
                    }
                }
                "cells" => {
                    seen_cells = true;
                    for (l, f) in rows {
                        if f.len() != 6 {
                            return Err(fail(l, "cell needs 4 vertices, subdomain and tag".into()));
                        }
                        let mut ids = [0; 4];
                        for (k, id) in ids.iter_mut().enumerate() {
                            *id = parse_index(l, f[k], mesh.vertices.len())?;
                        }
                        let sub = match f[4].to_ascii_lowercase().as_str() {
                            "fluid" => Subdomain::Fluid,
                            "solid" => Subdomain::Solid,
                            other => return Err(fail(l, format!("unknown subdomain `{other}`"))),
                        };
                        let tag = f[5]
                            .parse()
                            .map_err(|e| fail(l, format!("bad tag: {e}")))?;
                        mesh.cells.push(ids);
                        mesh.subdomains.push(sub);
                        mesh.cell_tags.push(tag);
                    }
                }
                "facets" => {
                    for (l, f) in rows {
                        if f.len() < 3 {
                            return Err(fail(l, "facet needs 2 vertices and a marker".into()));
                        }
                        let a = parse_index(l, f[0], mesh.vertices.len())?;
                        let b = parse_index(l, f[1], mesh.vertices.len())?;
                        for name in &f[2..] {
                            let m = Marker::from_name(name)
                                .ok_or_else(|| fail(l, format!("unknown marker `{name}`")))?;
                            mesh.facet_markers
                                .entry(FacetKey::new(a, b))
                                .or_default()
                                .insert(m);
                        }
                    }
                }
                "curves" => {
                    for (l, f) in rows {
                        if f.len() != 4 {
                            return Err(fail(l, "curve needs marker cx cy r".into()));
                        }
                        let m = Marker::from_name(f[0])
                            .ok_or_else(|| fail(l, format!("unknown marker `{}`", f[0])))?;
                        let circle = Circle {
                            center: [parse_f(l, f[1])?, parse_f(l, f[2])?],
                            radius: parse_f(l, f[3])?,
                        };
                        mesh.curves.push((m, circle));
                    }
                }
                other => return Err(fail(ln, format!("unknown section `{other}`"))),
            }
        }
        if !seen_vertices || !seen_cells {
            return Err(fail(0, "missing `vertices` or `cells` section".into()));
        }
        Ok(mesh)
    }
}

fn parse_f(line: usize, s: &str) -> Result<f64> {
    s.parse().map_err(|e| Error::MeshFormat {
        line,
        message: format!("bad number `{s}`: {e}"),
    })
}

fn parse_index(line: usize, s: &str, bound: usize) -> Result<usize> {
    let i: usize = s.parse().map_err(|e| Error::MeshFormat {
        line,
        message: format!("bad index `{s}`: {e}"),
    })?;
    if i >= bound {
        return Err(Error::MeshFormat {
            line,
            message: format!("vertex index {i} out of range"),
        });
    }
    Ok(i)
}
