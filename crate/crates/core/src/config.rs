//! Sectioned key-value configuration files.
//!
//! ```text
//! # comment
//! [problem]
//! preset = fsi1
//! [time]
//! steps = 3          # trailing comments are allowed
//! ```
//!
//! A file starts from `problem.preset` (default `fsi1`), then applies every
//! other key in file order, then the command-line overrides. Keys outside a
//! section are written `section.key = value`. Unknown sections and keys are
//! errors. [`to_text`] writes a complete file that reproduces a config.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::fem::{DisplacementRule, MeanVelocity, VelocityRule};
use crate::forms::{ControlMode, ControlRegion};
use crate::mesh::{FlappingGeometry, Marker};
use crate::problems::{preset, FunctionalSpec, InitialState, MeshSpec, ProblemConfig, Target};
use crate::timestepper::SchemeKind;

/// One `key = value` assignment with its origin for error messages.
#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    /// `section.key`, lower case.
    pub key: String,
    pub value: String,
    /// `file:line` or `--set`.
    pub origin: String,
}

/// Splits a config text into entries.
pub fn parse(text: &str, source: &str) -> Result<Vec<Entry>> {
    let mut section = String::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let origin = format!("{source}:{}", i + 1);
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| Error::Config(format!("{origin}: unterminated section header")))?
                .trim()
                .to_ascii_lowercase();
            if !SECTIONS.contains(&name.as_str()) {
                return Err(Error::Config(format!("{origin}: unknown section [{name}]")));
            }
            section = name;
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("{origin}: expected `key = value`")))?;
        let key = key.trim().to_ascii_lowercase();
        let key = if key.contains('.') || section.is_empty() {
            key
        } else {
            format!("{section}.{key}")
        };
        out.push(Entry {
            key,
            value: value.trim().to_string(),
            origin,
        });
    }
    Ok(out)
}

/// Parses a `section.key=value` override.
pub fn parse_override(arg: &str) -> Result<Entry> {
    let (key, value) = arg
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("--set {arg}: expected KEY=VALUE")))?;
    Ok(Entry {
        key: key.trim().to_ascii_lowercase(),
        value: value.trim().to_string(),
        origin: "--set".into(),
    })
}

/// Builds a config from file entries followed by overrides.
pub fn load(entries: &[Entry]) -> Result<ProblemConfig> {
    let base = entries
        .iter()
        .rev()
        .find(|e| e.key == "problem.preset")
        .map(|e| e.value.as_str())
        .unwrap_or("fsi1");
    let mut config = preset(base)?;
    for e in entries.iter().filter(|e| e.key != "problem.preset") {
        apply(&mut config, &e.key, &e.value)
            .map_err(|err| Error::Config(format!("{}: {}: {}", e.origin, e.key, strip(err))))?;
    }
    Ok(config)
}

/// Reads a config file and applies `overrides` (`section.key=value`).
pub fn load_file(path: Option<&std::path::Path>, overrides: &[String]) -> Result<ProblemConfig> {
    let mut entries = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            let mut entries = parse(&text, &p.display().to_string())?;
            // file paths inside a config are relative to the config file
            let dir = p.parent().unwrap_or(std::path::Path::new(""));
            for e in &mut entries {
                if PATH_KEYS.contains(&e.key.as_str()) && std::path::Path::new(&e.value).is_relative() {
                    e.value = dir.join(&e.value).display().to_string();
                }
            }
            entries
        }
        None => Vec::new(),
    };
    for o in overrides {
        entries.push(parse_override(o)?);
    }
    load(&entries)
}

const PATH_KEYS: [&str; 2] = ["inflow.table_file", "mesh.path"];

fn strip(e: Error) -> String {
    match e {
        Error::Config(m) => m,
        other => other.to_string(),
    }
}

const SECTIONS: [&str; 13] = [
    "problem",
    "mesh",
    "material",
    "bc",
    "inflow",
    "time",
    "newton",
    "optimizer",
    "functional",
    "control",
    "initial",
    "solver",
    "output",
];

fn bad(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn num(v: &str) -> Result<f64> {
    v.parse::<f64>().map_err(|_| bad(format!("expected a number, got `{v}`")))
}

fn count(v: &str) -> Result<usize> {
    v.parse::<usize>()
        .map_err(|_| bad(format!("expected a non-negative integer, got `{v}`")))
}

fn flag(v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(bad(format!("expected true or false, got `{v}`"))),
    }
}

fn list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn point(v: &str) -> Result<[f64; 2]> {
    let xs: Vec<f64> = list(v).map(num).collect::<Result<_>>()?;
    match xs[..] {
        [x, y] => Ok([x, y]),
        _ => Err(bad(format!("expected `x, y`, got `{v}`"))),
    }
}

fn marker(v: &str) -> Result<Marker> {
    Marker::from_name(v).ok_or_else(|| {
        let names: Vec<&str> = Marker::ALL.iter().map(|m| m.name()).collect();
        bad(format!("unknown marker `{v}` (known: {})", names.join(", ")))
    })
}

fn rules<R>(v: &str, rule: impl Fn(&str) -> Result<R>) -> Result<Vec<(Marker, R)>> {
    list(v)
        .map(|item| {
            let (m, r) = item
                .split_once(':')
                .ok_or_else(|| bad(format!("expected `marker:rule`, got `{item}`")))?;
            Ok((marker(m.trim())?, rule(r.trim())?))
        })
        .collect()
}

fn samples(v: &str) -> Result<Vec<(f64, f64)>> {
    let s: Vec<(f64, f64)> = list(v)
        .map(|item| {
            let (t, x) = item
                .split_once(':')
                .ok_or_else(|| bad(format!("expected `t:value`, got `{item}`")))?;
            Ok((num(t.trim())?, num(x.trim())?))
        })
        .collect::<Result<_>>()?;
    check_samples(s)
}

fn check_samples(s: Vec<(f64, f64)>) -> Result<Vec<(f64, f64)>> {
    if s.is_empty() {
        return Err(bad("empty sample table"));
    }
    if s.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(bad("sample times must increase strictly"));
    }
    Ok(s)
}

/// Reads `t v` pairs, one per line, separated by whitespace or a comma.
pub fn read_table(path: &std::path::Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
    let mut s = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|c| !c.is_empty())
            .collect();
        match cols[..] {
            [t, v] => s.push((num(t)?, num(v)?)),
            _ => return Err(bad(format!("{}:{}: expected `t v`", path.display(), i + 1))),
        }
    }
    check_samples(s)
}

fn mean_parts(m: &MeanVelocity) -> (f64, f64) {
    match m {
        MeanVelocity::Ramped { value, t_ramp } => (*value, *t_ramp),
        MeanVelocity::Table(_) => (0.0, 0.0),
    }
}

/// Sets one key.
pub fn apply(c: &mut ProblemConfig, key: &str, v: &str) -> Result<()> {
    let (section, name) = key
        .split_once('.')
        .ok_or_else(|| bad("keys have the form section.key"))?;
    match (section, name) {
        ("problem", "name") => c.name = v.to_string(),

        ("mesh", "kind") => {
            c.mesh = match v {
                "benchmark" => MeshSpec::Benchmark,
                "flapping" => MeshSpec::Flapping {
                    gap: FlappingGeometry::default().gap,
                },
                "beam" => MeshSpec::Beam {
                    nx: 8,
                    ny: 1,
                    length: 1.0,
                    thickness: 0.1,
                },
                "file" => MeshSpec::File(PathBuf::new()),
                _ => return Err(bad(format!("expected benchmark, flapping, beam or file, got `{v}`"))),
            }
        }
        ("mesh", "refinements") => c.refinements = count(v)?,
        ("mesh", "gap") => match &mut c.mesh {
            MeshSpec::Flapping { gap } => *gap = num(v)?,
            _ => return Err(bad("applies to flapping meshes only")),
        },
        ("mesh", "nx" | "ny" | "length" | "thickness") => match &mut c.mesh {
            MeshSpec::Beam {
                nx,
                ny,
                length,
                thickness,
            } => match name {
                "nx" => *nx = count(v)?.max(1),
                "ny" => *ny = count(v)?.max(1),
                "length" => *length = num(v)?,
                _ => *thickness = num(v)?,
            },
            _ => return Err(bad("applies to beam meshes only")),
        },
        ("mesh", "path") => match &mut c.mesh {
            MeshSpec::File(p) => *p = PathBuf::from(v),
            _ => return Err(bad("applies to file meshes only")),
        },

        ("material", "rho_f") => c.material.rho_f = num(v)?,
        ("material", "nu_f") => c.material.nu_f = num(v)?,
        ("material", "rho_s") => c.material.rho_s = num(v)?,
        ("material", "mu") => c.material.mu = num(v)?,
        ("material", "lambda") => c.material.lambda = num(v)?,
        ("material", "nu_s") => c.material.nu_s = num(v)?,
        ("material", "alpha_mesh") => c.material.alpha_mesh = num(v)?,

        ("bc", "velocity") => {
            c.bc.velocity = rules(v, |r| match r {
                "zero" => Ok(VelocityRule::Zero),
                "inflow" => Ok(VelocityRule::Inflow),
                "free" => Ok(VelocityRule::Free),
                _ => Err(bad(format!("velocity rule must be zero, inflow or free, got `{r}`"))),
            })?
        }
        ("bc", "displacement") => {
            c.bc.displacement = rules(v, |r| match r {
                "zero" => Ok(DisplacementRule::Zero),
                "free" => Ok(DisplacementRule::Free),
                _ => Err(bad(format!("displacement rule must be zero or free, got `{r}`"))),
            })?
        }
        ("bc", "pin_pressure") => c.bc.pin_pressure = flag(v)?,

        ("inflow", "scale") => c.inflow.scale = num(v)?,
        ("inflow", "y0") => c.inflow.y0 = num(v)?,
        ("inflow", "y1") => c.inflow.y1 = num(v)?,
        ("inflow", "mean") => {
            let (_, t_ramp) = mean_parts(&c.inflow.mean);
            c.inflow.mean = MeanVelocity::Ramped { value: num(v)?, t_ramp };
        }
        ("inflow", "t_ramp") => {
            let (value, _) = mean_parts(&c.inflow.mean);
            let t_ramp = num(v)?;
            if !(t_ramp >= 0.0) {
                return Err(bad("must be >= 0"));
            }
            c.inflow.mean = MeanVelocity::Ramped { value, t_ramp };
        }
        ("inflow", "table") => c.inflow.mean = MeanVelocity::Table(samples(v)?),
        ("inflow", "table_file") => c.inflow.mean = MeanVelocity::Table(read_table(v.as_ref())?),

        ("time", "scheme") => {
            c.scheme.kind = match v {
                "backward_euler" => SchemeKind::BackwardEuler,
                "shifted_cn" => SchemeKind::ShiftedCrankNicolson,
                "theta" => SchemeKind::Theta(c.scheme.theta()),
                _ => return Err(bad(format!("expected backward_euler, shifted_cn or theta, got `{v}`"))),
            }
        }
        ("time", "theta") => c.scheme.kind = SchemeKind::Theta(num(v)?),
        ("time", "k") => c.scheme.k = num(v)?,
        ("time", "steps") => c.scheme.steps = count(v)?,

        ("newton", "tol") => c.newton.tol = num(v)?,
        ("newton", "abs_floor") => c.newton.abs_floor = num(v)?,
        ("newton", "max_iterations") => c.newton.max_iterations = count(v)?,
        ("newton", "backtrack") => c.newton.backtrack = num(v)?,
        ("newton", "max_backtracks") => c.newton.max_backtracks = count(v)?,
        ("newton", "rebuild_low") => c.newton.rebuild_band[0] = num(v)?,
        ("newton", "rebuild_high") => c.newton.rebuild_band[1] = num(v)?,
        ("newton", "reuse") => c.newton.reuse = flag(v)?,

        ("optimizer", "gamma") => c.optimizer.gamma = num(v)?,
        ("optimizer", "beta") => c.optimizer.beta = num(v)?,
        ("optimizer", "tol_abs") => c.optimizer.tol_abs = num(v)?,
        ("optimizer", "tol_rel") => c.optimizer.tol_rel = num(v)?,
        ("optimizer", "max_iterations") => c.optimizer.max_iterations = count(v)?,
        ("optimizer", "max_trials") => c.optimizer.max_trials = count(v)?,

        ("functional", "kind") => {
            c.functional = match v {
                "tracking" => FunctionalSpec::TipTracking {
                    point: crate::mesh::BENCHMARK_TIP,
                    target: Target::Fixed(0.0),
                },
                "drag" => FunctionalSpec::Drag {
                    marker: Marker::DragBoundary,
                },
                _ => return Err(bad(format!("expected tracking or drag, got `{v}`"))),
            }
        }
        ("functional", "point") => match &mut c.functional {
            FunctionalSpec::TipTracking { point: p, .. } => *p = point(v)?,
            _ => return Err(bad("applies to tracking functionals only")),
        },
        ("functional", "target") => match &mut c.functional {
            FunctionalSpec::TipTracking { target, .. } => {
                *target = match v {
                    "reference" => Target::Reference(match target {
                        Target::Reference(mu) => *mu,
                        _ => crate::problems::FSI1_REFERENCE_MU,
                    }),
                    "fsi1_reference" => Target::Fsi1Reference,
                    _ => Target::Fixed(num(v)?),
                }
            }
            _ => return Err(bad("applies to tracking functionals only")),
        },
        ("functional", "target_mu") => match &mut c.functional {
            FunctionalSpec::TipTracking { target, .. } => *target = Target::Reference(num(v)?),
            _ => return Err(bad("applies to tracking functionals only")),
        },
        ("functional", "marker") => match &mut c.functional {
            FunctionalSpec::Drag { marker: m } => *m = marker(v)?,
            _ => return Err(bad("applies to drag functionals only")),
        },

        ("control", "q0") => c.q0 = num(v)?,
        ("control", "q_d") => c.q_d = num(v)?,
        ("control", "alpha") => c.alpha = num(v)?,
        ("control", "mode") => {
            c.material.control_mode = match v {
                "poisson_locked" => ControlMode::PoissonLocked,
                "mu_only" => ControlMode::MuOnly,
                _ => return Err(bad(format!("expected poisson_locked or mu_only, got `{v}`"))),
            }
        }
        ("control", "region") => {
            c.material.control_region = match v {
                "whole_solid" => ControlRegion::WholeSolid,
                "tagged" => ControlRegion::Tagged,
                _ => return Err(bad(format!("expected whole_solid or tagged, got `{v}`"))),
            }
        }

        ("initial", "kind") => {
            c.initial = match v {
                "rest" => InitialState::Rest,
                "beam_velocity" => InitialState::BeamVelocity {
                    amplitude: 0.1,
                    length: 1.0,
                    y_mid: 0.05,
                },
                _ => return Err(bad(format!("expected rest or beam_velocity, got `{v}`"))),
            }
        }
        ("initial", "amplitude" | "length" | "y_mid") => match &mut c.initial {
            InitialState::BeamVelocity {
                amplitude,
                length,
                y_mid,
            } => {
                let x = num(v)?;
                match name {
                    "amplitude" => *amplitude = x,
                    "length" => *length = x,
                    _ => *y_mid = x,
                }
            }
            InitialState::Rest => return Err(bad("applies to beam_velocity only")),
        },

        ("solver", "memory_budget") => c.memory_budget = count(v)?,
        ("solver", "quadrature") => c.quadrature = count(v)?,

        ("output", "point") => c.output.point = point(v)?,
        ("output", "drag") => c.output.drag = list(v).map(marker).collect::<Result<_>>()?,
        ("output", "vtk_every") => c.output.vtk_every = count(v)?,

        _ => return Err(bad("unknown key")),
    }
    Ok(())
}

fn join_rules<R>(rules: &[(Marker, R)], name: impl Fn(&R) -> &'static str) -> String {
    let parts: Vec<String> = rules.iter().map(|(m, r)| format!("{m}:{}", name(r))).collect();
    parts.join(", ")
}

/// A complete config file for `c`; loading it gives back `c`.
pub fn to_text(c: &ProblemConfig) -> String {
    let mut s = String::new();
    let mut put = |line: String| {
        s.push_str(&line);
        s.push('\n');
    };
    put("[problem]".into());
    put(format!("preset = {}", preset_for(&c.name)));
    put(format!("name = {}", c.name));

    put("\n[mesh]".into());
    match &c.mesh {
        MeshSpec::Benchmark => put("kind = benchmark".into()),
        MeshSpec::Flapping { gap } => {
            put("kind = flapping".into());
            put(format!("gap = {gap}"));
        }
        MeshSpec::Beam {
            nx,
            ny,
            length,
            thickness,
        } => {
            put("kind = beam".into());
            put(format!("nx = {nx}\nny = {ny}\nlength = {length}\nthickness = {thickness}"));
        }
        MeshSpec::File(p) => {
            put("kind = file".into());
            put(format!("path = {}", p.display()));
        }
    }
    put(format!("refinements = {}", c.refinements));

    let m = &c.material;
    put("\n[material]".into());
    put(format!(
        "rho_f = {}\nnu_f = {}\nrho_s = {}\nmu = {}\nlambda = {}\nnu_s = {}\nalpha_mesh = {}",
        m.rho_f, m.nu_f, m.rho_s, m.mu, m.lambda, m.nu_s, m.alpha_mesh
    ));

    put("\n[bc]".into());
    put(format!(
        "velocity = {}",
        join_rules(&c.bc.velocity, |r| match r {
            VelocityRule::Zero => "zero",
            VelocityRule::Inflow => "inflow",
            VelocityRule::Free => "free",
        })
    ));
    put(format!(
        "displacement = {}",
        join_rules(&c.bc.displacement, |r| match r {
            DisplacementRule::Zero => "zero",
            DisplacementRule::Free => "free",
        })
    ));
    put(format!("pin_pressure = {}", c.bc.pin_pressure));

    put("\n[inflow]".into());
    put(format!("scale = {}\ny0 = {}\ny1 = {}", c.inflow.scale, c.inflow.y0, c.inflow.y1));
    match &c.inflow.mean {
        MeanVelocity::Ramped { value, t_ramp } => put(format!("mean = {value}\nt_ramp = {t_ramp}")),
        MeanVelocity::Table(t) => {
            let parts: Vec<String> = t.iter().map(|(t, v)| format!("{t}:{v}")).collect();
            put(format!("table = {}", parts.join(", ")));
        }
    }

    put("\n[time]".into());
    match c.scheme.kind {
        SchemeKind::BackwardEuler => put("scheme = backward_euler".into()),
        SchemeKind::ShiftedCrankNicolson => put("scheme = shifted_cn".into()),
        SchemeKind::Theta(t) => put(format!("scheme = theta\ntheta = {t}")),
    }
    put(format!("k = {}\nsteps = {}", c.scheme.k, c.scheme.steps));

    let n = &c.newton;
    put("\n[newton]".into());
    put(format!(
        "tol = {}\nabs_floor = {}\nmax_iterations = {}\nbacktrack = {}\nmax_backtracks = {}\nrebuild_low = {}\nrebuild_high = {}\nreuse = {}",
        n.tol, n.abs_floor, n.max_iterations, n.backtrack, n.max_backtracks, n.rebuild_band[0], n.rebuild_band[1], n.reuse
    ));

    let o = &c.optimizer;
    put("\n[optimizer]".into());
    put(format!(
        "gamma = {}\nbeta = {}\ntol_abs = {}\ntol_rel = {}\nmax_iterations = {}\nmax_trials = {}",
        o.gamma, o.beta, o.tol_abs, o.tol_rel, o.max_iterations, o.max_trials
    ));

    put("\n[functional]".into());
    match &c.functional {
        FunctionalSpec::TipTracking { point, target } => {
            put("kind = tracking".into());
            put(format!("point = {}, {}", point[0], point[1]));
            match target {
                Target::Fixed(v) => put(format!("target = {v}")),
                Target::Reference(mu) => put(format!("target = reference\ntarget_mu = {mu}")),
                Target::Fsi1Reference => put("target = fsi1_reference".into()),
            }
        }
        FunctionalSpec::Drag { marker } => put(format!("kind = drag\nmarker = {marker}")),
    }

    put("\n[control]".into());
    put(format!("q0 = {}\nq_d = {}\nalpha = {}", c.q0, c.q_d, c.alpha));
    put(format!(
        "mode = {}\nregion = {}",
        match m.control_mode {
            ControlMode::PoissonLocked => "poisson_locked",
            ControlMode::MuOnly => "mu_only",
        },
        match m.control_region {
            ControlRegion::WholeSolid => "whole_solid",
            ControlRegion::Tagged => "tagged",
        }
    ));

    put("\n[initial]".into());
    match &c.initial {
        InitialState::Rest => put("kind = rest".into()),
        InitialState::BeamVelocity {
            amplitude,
            length,
            y_mid,
        } => put(format!(
            "kind = beam_velocity\namplitude = {amplitude}\nlength = {length}\ny_mid = {y_mid}"
        )),
    }

    put("\n[solver]".into());
    put(format!("memory_budget = {}\nquadrature = {}", c.memory_budget, c.quadrature));

    put("\n[output]".into());
    put(format!("point = {}, {}", c.output.point[0], c.output.point[1]));
    let drag: Vec<&str> = c.output.drag.iter().map(|m| m.name()).collect();
    put(format!("drag = {}", drag.join(", ")));
    put(format!("vtk_every = {}", c.output.vtk_every));
    s
}

fn preset_for(name: &str) -> &'static str {
    match name {
        "fsi3" => "fsi3",
        "flapping" => "flapping",
        "beam" => "beam",
        _ => "fsi1",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{beam_config, flapping_config, fsi1_config, fsi3_config};
    use proptest::prelude::*;

    fn roundtrip(c: &ProblemConfig) -> ProblemConfig {
        load(&parse(&to_text(c), "test").unwrap()).unwrap()
    }

    #[test]
    fn presets_roundtrip() {
        for c in [fsi1_config(), fsi3_config(), flapping_config(), beam_config()] {
            assert_eq!(roundtrip(&c), c, "{}", c.name);
        }
    }

    #[test]
    fn sections_comments_and_overrides() {
        let text = "# header\n[problem]\npreset = fsi3\n\n[time]\nsteps = 7   # short\nk=2e-3\n\
                    control.q0 = 1e6\n[inflow]\nt_ramp = 0.5\n";
        let mut entries = parse(text, "x.cfg").unwrap();
        entries.push(parse_override("time.steps=9").unwrap());
        let c = load(&entries).unwrap();
        assert_eq!(c.name, "fsi3");
        assert_eq!(c.scheme.steps, 9);
        assert_eq!(c.scheme.k, 2e-3);
        assert_eq!(c.scheme.kind, SchemeKind::ShiftedCrankNicolson);
        assert_eq!(c.q0, 1e6);
        assert_eq!(c.inflow.mean, MeanVelocity::Ramped { value: 2.0, t_ramp: 0.5 });
    }

    #[test]
    fn errors_name_the_line() {
        let err = |text: &str| match load(&parse(text, "f").unwrap_or_default()) {
            Err(Error::Config(m)) => m,
            other => panic!("{other:?}"),
        };
        assert!(err("[time]\nstepz = 3\n").contains("f:2: time.stepz: unknown key"));
        assert!(err("[time]\nsteps = -3\n").contains("non-negative integer"));
        assert!(err("[mesh]\ngap = 0.5\n").contains("flapping meshes only"));
        assert!(err("[problem]\npreset = fsi9\n").contains("unknown preset"));
        assert!(err("[bc]\nvelocity = moon:zero\n").contains("unknown marker"));
        assert!(matches!(parse("[nope]\n", "f"), Err(Error::Config(_))));
        assert!(matches!(parse("steps 3\n", "f"), Err(Error::Config(_))));
        assert!(matches!(parse_override("time.steps"), Err(Error::Config(_))));
    }

    #[test]
    fn table_inline_and_file() {
        let c = load(&[parse_override("inflow.table = 0:0, 0.5:2, 1:0").unwrap()]).unwrap();
        assert_eq!(c.inflow.mean.at(0.25), 1.0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pulse.txt");
        std::fs::write(&path, "# t v\n0 0\n0.5, 4\n1 0\n").unwrap();
        let c = load(&[parse_override(&format!("inflow.table_file = {}", path.display())).unwrap()]).unwrap();
        assert_eq!(c.inflow.mean.at(0.75), 2.0);
        assert!(load(&[parse_override("inflow.table = 1:0, 0.5:1").unwrap()]).is_err());
    }

    #[test]
    fn shipped_configs_match_presets() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        for c in [fsi1_config(), fsi3_config(), flapping_config(), beam_config()] {
            let path = dir.join(format!("{}.cfg", c.name));
            let mut loaded = load_file(Some(&path), &[]).unwrap();
            if let (MeanVelocity::Table(a), MeanVelocity::Table(b)) = (&loaded.inflow.mean, &c.inflow.mean) {
                assert_eq!(a.len(), b.len());
                for (x, y) in a.iter().zip(b) {
                    assert!((x.0 - y.0).abs() < 1e-15 && (x.1 - y.1).abs() < 1e-12);
                }
                loaded.inflow.mean = c.inflow.mean.clone();
            }
            assert_eq!(loaded, c, "{}", path.display());
        }
    }

    proptest! {
        #[test]
        fn numeric_fields_roundtrip(
            k in 1e-6f64..0.49,
            steps in 1usize..10_000,
            mu in 1.0f64..1e12,
            alpha in 0.0f64..10.0,
            theta in 0.5f64..=1.0,
            scale in -5.0f64..5.0,
            px in -10.0f64..10.0,
            t_ramp in 0.0f64..3.0,
        ) {
            let mut c = fsi1_config();
            c.scheme.k = k;
            c.scheme.steps = steps;
            c.scheme.kind = SchemeKind::Theta(theta);
            c.material.mu = mu;
            c.alpha = alpha;
            c.inflow.scale = scale;
            c.inflow.mean = MeanVelocity::Ramped { value: scale * 2.0, t_ramp };
            c.output.point = [px, -px];
            prop_assert_eq!(roundtrip(&c), c);
        }
    }
}
