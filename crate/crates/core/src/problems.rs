//! Problem presets and the assembled problem they build.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::fem::{BcSpec, DisplacementRule, DofMap, Field, InflowProfile, MeanVelocity, VelocityRule};
use crate::forms::{Assembler, ControlMode, ControlRegion, MaterialParams};
use crate::functionals::{BoundFunctional, CostFunctional, FunctionalKind};
use crate::mesh::{beam_mesh, flapping_mesh, fsi_benchmark_mesh, FlappingGeometry, Marker, Mesh, BENCHMARK_TIP};
use crate::newton::NewtonSettings;
use crate::optimize::{FsiReduced, OptimizerSettings};
use crate::output::{OutputSpec, Probe};
use crate::timestepper::{run_forward, ForwardModel, ForwardRun, SchemeKind, ThetaScheme};

#[derive(Clone, Debug, PartialEq)]
pub enum MeshSpec {
    Benchmark,
    Flapping { gap: f64 },
    /// Cantilever `[0, length] × [0, thickness]` clamped at `x = 0`.
    Beam { nx: usize, ny: usize, length: f64, thickness: f64 },
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialState {
    Rest,
    /// Bending velocity of a clamped beam along `y = y_mid`: transverse
    /// `amplitude·(ξ⁴ − 4ξ³ + 6ξ²)/3` with `ξ = x/length`, plus the
    /// matching section rotation `−(y − y_mid)·∂v_y/∂x`.
    BeamVelocity { amplitude: f64, length: f64, y_mid: f64 },
}

/// Tracking target `u_d`.
#[derive(Clone, Debug, PartialEq)]
pub enum Target {
    Fixed(f64),
    /// End-time tip displacement of this problem run at the given μ.
    Reference(f64),
    /// End-time tip displacement of the FSI-1 preset (same refinement) at
    /// its reference μ.
    Fsi1Reference,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FunctionalSpec {
    TipTracking { point: [f64; 2], target: Target },
    Drag { marker: Marker },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemConfig {
    pub name: String,
    pub mesh: MeshSpec,
    pub refinements: usize,
    pub material: MaterialParams,
    pub bc: BcSpec,
    pub inflow: InflowProfile,
    pub scheme: ThetaScheme,
    pub newton: NewtonSettings,
    pub optimizer: OptimizerSettings,
    pub functional: FunctionalSpec,
    pub alpha: f64,
    pub q_d: f64,
    pub q0: f64,
    pub initial: InitialState,
    pub memory_budget: usize,
    pub quadrature: usize,
    pub output: OutputSpec,
}

/// Reference shear modulus of the FSI-1 tracking target.
pub const FSI1_REFERENCE_MU: f64 = 5e5;

/// Flapping-valve end time.
pub const FLAPPING_END_TIME: f64 = 0.579375;

fn benchmark_material(mu: f64) -> MaterialParams {
    MaterialParams {
        rho_f: 1e3,
        nu_f: 1e-3,
        rho_s: 1e3,
        mu,
        lambda: 0.0,
        nu_s: 0.4,
        alpha_mesh: 1e-5,
        control_mode: ControlMode::PoissonLocked,
        control_region: ControlRegion::WholeSolid,
    }
}

/// Newton settings for the channel benchmarks. Residual roundoff there sits
/// near 10⁻¹¹, so the absolute floor is raised above it.
fn benchmark_newton() -> NewtonSettings {
    NewtonSettings {
        abs_floor: 1e-9,
        ..NewtonSettings::default()
    }
}

fn base(name: &str) -> ProblemConfig {
    ProblemConfig {
        name: name.to_string(),
        mesh: MeshSpec::Benchmark,
        refinements: 0,
        material: benchmark_material(FSI1_REFERENCE_MU),
        bc: BcSpec::channel(),
        inflow: InflowProfile::none(),
        scheme: ThetaScheme::new(SchemeKind::BackwardEuler, 1.0, 1),
        newton: NewtonSettings::default(),
        optimizer: OptimizerSettings::default(),
        functional: FunctionalSpec::TipTracking {
            point: BENCHMARK_TIP,
            target: Target::Fixed(0.0),
        },
        alpha: 0.0,
        q_d: 0.0,
        q0: 1.0,
        initial: InitialState::Rest,
        memory_budget: 1 << 30,
        quadrature: 3,
        output: OutputSpec {
            point: BENCHMARK_TIP,
            drag: vec![Marker::Cylinder, Marker::Interface],
            vtk_every: 0,
        },
    }
}

/// Quasi-stationary FSI-1 benchmark: backward Euler, k = 1 s, 25 steps,
/// tracking the tip displacement of the μ = 5·10⁵ solution.
pub fn fsi1_config() -> ProblemConfig {
    ProblemConfig {
        inflow: InflowProfile {
            scale: 1.5,
            y0: 0.0,
            y1: 0.41,
            mean: MeanVelocity::constant(0.2),
        },
        scheme: ThetaScheme::new(SchemeKind::BackwardEuler, 1.0, 25),
        functional: FunctionalSpec::TipTracking {
            point: BENCHMARK_TIP,
            target: Target::Reference(FSI1_REFERENCE_MU),
        },
        alpha: 1.0,
        q_d: 5e5,
        q0: 5000.0,
        newton: benchmark_newton(),
        ..base("fsi1")
    }
}

/// FSI-3 dynamics at desk scale: shifted Crank-Nicolson, k = 10⁻³ s,
/// 200 steps, ramped inflow with mean 2 m/s.
pub fn fsi3_config() -> ProblemConfig {
    ProblemConfig {
        material: benchmark_material(2e6),
        inflow: InflowProfile {
            scale: 1.5,
            y0: 0.0,
            y1: 0.41,
            mean: MeanVelocity::Ramped { value: 2.0, t_ramp: 2.0 },
        },
        scheme: ThetaScheme::new(SchemeKind::ShiftedCrankNicolson, 1e-3, 200),
        functional: FunctionalSpec::TipTracking {
            point: BENCHMARK_TIP,
            target: Target::Fsi1Reference,
        },
        alpha: 0.1,
        q_d: 5e5,
        q0: 2e6,
        newton: benchmark_newton(),
        ..base("fsi3")
    }
}

/// Half-sine mean-velocity pulse over the flapping horizon. An
/// approximation: the source gives the pulse only as a plot.
pub fn default_pulse() -> MeanVelocity {
    let n = 20;
    MeanVelocity::Table(
        (0..=n)
            .map(|i| {
                let t = FLAPPING_END_TIME * i as f64 / n as f64;
                (t, 10.0 * (std::f64::consts::PI * t / FLAPPING_END_TIME).sin())
            })
            .collect(),
    )
}

/// Venous valve flaps (cgs units), drag on the lower wall behind the flaps,
/// μ controlled in the flaps only.
pub fn flapping_config() -> ProblemConfig {
    ProblemConfig {
        mesh: MeshSpec::Flapping {
            gap: FlappingGeometry::default().gap,
        },
        material: MaterialParams {
            rho_f: 1e2,
            nu_f: 0.1,
            rho_s: 1e2,
            mu: 1e9,
            lambda: 0.0,
            nu_s: 0.4,
            alpha_mesh: 1e-5,
            control_mode: ControlMode::PoissonLocked,
            control_region: ControlRegion::Tagged,
        },
        bc: BcSpec {
            velocity: vec![(Marker::Inflow, VelocityRule::Inflow)],
            displacement: vec![
                (Marker::Inflow, DisplacementRule::Zero),
                (Marker::Outflow, DisplacementRule::Zero),
            ],
            pin_pressure: false,
        },
        inflow: InflowProfile {
            scale: 0.15,
            y0: 0.0,
            y1: 1.61,
            mean: default_pulse(),
        },
        scheme: ThetaScheme::new(SchemeKind::ShiftedCrankNicolson, FLAPPING_END_TIME / 618.0, 618),
        functional: FunctionalSpec::Drag {
            marker: Marker::DragBoundary,
        },
        alpha: 1.0,
        q_d: 5e6,
        q0: 2e7,
        newton: NewtonSettings {
            abs_floor: 1e-7,
            ..NewtonSettings::default()
        },
        output: OutputSpec {
            // tip of the lower flap
            point: [
                0.5 * (FlappingGeometry::FLAP_X[0] + FlappingGeometry::FLAP_X[1]),
                FlappingGeometry::default().flap_height(),
            ],
            drag: vec![Marker::DragBoundary],
            vtk_every: 0,
        },
        ..base("flapping")
    }
}

/// Solid-only cantilever released with a bending velocity profile.
pub fn beam_config() -> ProblemConfig {
    let (length, thickness) = (1.0, 0.1);
    ProblemConfig {
        mesh: MeshSpec::Beam {
            nx: 8,
            ny: 1,
            length,
            thickness,
        },
        material: benchmark_material(5e5),
        bc: BcSpec {
            velocity: vec![(Marker::Wall, VelocityRule::Zero)],
            displacement: vec![(Marker::Wall, DisplacementRule::Zero)],
            pin_pressure: false,
        },
        scheme: ThetaScheme::new(SchemeKind::BackwardEuler, 0.016, 25),
        functional: FunctionalSpec::TipTracking {
            point: [length, 0.5 * thickness],
            target: Target::Fixed(0.0),
        },
        q0: 5e5,
        initial: InitialState::BeamVelocity {
            amplitude: 0.1,
            length,
            y_mid: 0.5 * thickness,
        },
        output: OutputSpec {
            point: [length, 0.5 * thickness],
            drag: vec![],
            vtk_every: 0,
        },
        ..base("beam")
    }
}

pub fn preset(name: &str) -> Result<ProblemConfig> {
    match name {
        "fsi1" => Ok(fsi1_config()),
        "fsi3" => Ok(fsi3_config()),
        "flapping" => Ok(flapping_config()),
        "beam" => Ok(beam_config()),
        other => Err(Error::Config(format!(
            "unknown preset `{other}` (expected fsi1, fsi3, flapping or beam)"
        ))),
    }
}

/// A configuration with its mesh, dofs, assembler and bound functional.
pub struct Problem {
    pub config: ProblemConfig,
    pub mesh: Mesh,
    pub dofmap: DofMap,
    pub assembler: Assembler,
    pub functional: BoundFunctional,
    pub initial: Vec<f64>,
}

impl ProblemConfig {
    pub fn validate(&self) -> Result<()> {
        self.material.validate()?;
        self.scheme.validate()?;
        self.newton.validate()?;
        self.optimizer.validate()?;
        crate::forms::check_control(&[self.q0]).map_err(|_| {
            Error::Config(format!("control.q0 must be positive, got {}", self.q0))
        })?;
        if !(self.alpha >= 0.0) {
            return Err(Error::Config(format!("control.alpha must be >= 0, got {}", self.alpha)));
        }
        if !(1..=5).contains(&self.quadrature) {
            return Err(Error::Config(format!("quadrature must lie in 1..=5, got {}", self.quadrature)));
        }
        Ok(())
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        let mesh = match &self.mesh {
            MeshSpec::Benchmark => fsi_benchmark_mesh(self.refinements),
            MeshSpec::Flapping { gap } => {
                if !(*gap > 0.0 && *gap < FlappingGeometry::INNER_HEIGHT) {
                    return Err(Error::Config(format!("mesh.gap must lie in (0, 1.51), got {gap}")));
                }
                flapping_mesh(self.refinements, FlappingGeometry { gap: *gap })
            }
            MeshSpec::Beam {
                nx,
                ny,
                length,
                thickness,
            } => beam_mesh(*nx, *ny, *length, *thickness).refined(self.refinements),
            MeshSpec::File(path) => {
                let text = std::fs::read_to_string(path)?;
                let mut mesh = Mesh::from_text(&text)?;
                mesh.mark_interfaces();
                let problems = mesh.validate();
                if let Some(first) = problems.first() {
                    return Err(Error::Config(format!(
                        "mesh {}: {first} ({} problems)",
                        path.display(),
                        problems.len()
                    )));
                }
                mesh.refined(self.refinements)
            }
        };
        Ok(mesh)
    }

    /// Resolves reference-run targets to numbers.
    fn resolve_target(&self) -> Result<CostFunctional> {
        let kind = match &self.functional {
            FunctionalSpec::Drag { marker } => FunctionalKind::Drag { marker: *marker },
            FunctionalSpec::TipTracking { point, target } => {
                let value = match target {
                    Target::Fixed(v) => *v,
                    Target::Reference(mu) => self.reference_tip(*mu, *point)?,
                    Target::Fsi1Reference => {
                        let mut c = fsi1_config();
                        c.refinements = self.refinements;
                        c.reference_tip(FSI1_REFERENCE_MU, *point)?
                    }
                };
                FunctionalKind::TipTracking { point: *point, target: value }
            }
        };
        Ok(CostFunctional {
            kind,
            alpha: self.alpha,
            q_d: self.q_d,
        })
    }

    fn reference_tip(&self, mu: f64, point: [f64; 2]) -> Result<f64> {
        let mut c = self.clone();
        c.functional = FunctionalSpec::TipTracking {
            point,
            target: Target::Fixed(0.0),
        };
        let p = c.build()?;
        let run = p.forward(mu)?;
        let u = p.functional.observation(&run.trajectory.last()?)?;
        log::info!("tracking target from reference run at mu = {mu}: {u:.9e}");
        Ok(u)
    }

    pub fn build(&self) -> Result<Problem> {
        self.validate()?;
        let mesh = self.build_mesh()?;
        let dofmap = DofMap::new(&mesh, &self.bc)?;
        let assembler = Assembler::new(&mesh, &dofmap, self.material.clone(), self.quadrature);
        let functional = BoundFunctional::new(&self.resolve_target()?, &mesh, &dofmap, &self.material)?;
        let mut initial = vec![0.0; dofmap.len()];
        if let InitialState::BeamVelocity { amplitude, length, y_mid } = self.initial {
            for (n, x) in dofmap.node_coords.iter().enumerate() {
                let s = x[0] / length;
                let slope = amplitude * (4.0 * s.powi(3) - 12.0 * s * s + 12.0 * s) / (3.0 * length);
                initial[dofmap.dof(Field::Velocity, n, 0)] = -(x[1] - y_mid) * slope;
                initial[dofmap.dof(Field::Velocity, n, 1)] =
                    amplitude * (s.powi(4) - 4.0 * s.powi(3) + 6.0 * s * s) / 3.0;
            }
        }
        dofmap.impose(&mut initial, &self.inflow, 0.0);
        Ok(Problem {
            config: self.clone(),
            mesh,
            dofmap,
            assembler,
            functional,
            initial,
        })
    }
}

impl Problem {
    pub fn model(&self) -> ForwardModel<'_> {
        ForwardModel {
            assembler: &self.assembler,
            dofmap: &self.dofmap,
            inflow: &self.config.inflow,
            scheme: self.config.scheme,
            newton: &self.config.newton,
            memory_budget: self.config.memory_budget,
        }
    }

    pub fn forward(&self, q: f64) -> Result<ForwardRun> {
        crate::forms::check_control(&[q])?;
        run_forward(&self.model(), q, &self.initial)
    }

    pub fn probe(&self) -> Result<Probe> {
        Probe::new(&self.mesh, &self.dofmap, &self.config.material, &self.config.output)
    }

    pub fn reduced(&self) -> FsiReduced<'_> {
        FsiReduced::new(self.model(), &self.functional, self.initial.clone())
    }
}
