//! One-step-θ time loop and trajectory storage.

use std::cell::RefCell;
use std::fs::File;
use std::io::{Read, Seek, SeekFrom, Write};

use crate::error::{Error, Result};
use crate::fem::{DofMap, InflowProfile};
use crate::forms::{Assembler, Weights};
use crate::linalg::{DirectSolver, SparseOperator};
use crate::newton::{self, NewtonReport, NewtonSettings, NonlinearSystem};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SchemeKind {
    /// θ = 1.
    BackwardEuler,
    /// θ = ½ + k.
    ShiftedCrankNicolson,
    /// Fixed θ ∈ [½, 1].
    Theta(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaScheme {
    pub kind: SchemeKind,
    /// Step size.
    pub k: f64,
    pub steps: usize,
}

impl ThetaScheme {
    pub fn new(kind: SchemeKind, k: f64, steps: usize) -> Self {
        Self { kind, k, steps }
    }

    pub fn theta(&self) -> f64 {
        match self.kind {
            SchemeKind::BackwardEuler => 1.0,
            SchemeKind::ShiftedCrankNicolson => 0.5 + self.k,
            SchemeKind::Theta(t) => t,
        }
    }

    pub fn end_time(&self) -> f64 {
        self.steps as f64 * self.k
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.k
    }

    pub fn weights(&self) -> Weights {
        Weights::one_step_theta(self.theta(), self.k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::Config(format!("time.k must be positive, got {}", self.k)));
        }
        if self.steps == 0 {
            return Err(Error::Config("time.steps must be at least 1".into()));
        }
        match self.kind {
            SchemeKind::ShiftedCrankNicolson if self.k >= 0.5 => Err(Error::Config(format!(
                "shifted Crank-Nicolson needs k < 0.5, got {}",
                self.k
            ))),
            SchemeKind::Theta(t) if !(0.5..=1.0).contains(&t) => {
                Err(Error::Config(format!("time.theta must lie in [0.5, 1], got {t}")))
            }
            _ => Ok(()),
        }
    }
}

/// States `U⁰…U^N` with their times. States stay in memory up to a byte
/// budget; later states go to an anonymous temporary file.
#[derive(Debug)]
pub struct Trajectory {
    len: usize,
    times: Vec<f64>,
    memory: Vec<Vec<f64>>,
    spill: Option<RefCell<File>>,
    budget: usize,
}

impl Trajectory {
    pub fn new(len: usize, budget_bytes: usize) -> Self {
        Self {
            len,
            times: Vec::new(),
            memory: Vec::new(),
            spill: None,
            budget: budget_bytes,
        }
    }

    /// Number of stored states (N + 1 for a complete run).
    pub fn num_states(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state_len(&self) -> usize {
        self.len
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn spilled(&self) -> usize {
        self.times.len() - self.memory.len()
    }

    pub fn push(&mut self, t: f64, state: &[f64]) -> Result<()> {
        if state.len() != self.len {
            return Err(Error::DimensionMismatch {
                expected: self.len,
                got: state.len(),
            });
        }
        let in_memory = self.spill.is_none() && (self.memory.len() + 1) * self.len * 8 <= self.budget;
        if in_memory {
            self.memory.push(state.to_vec());
        } else {
            if self.spill.is_none() {
                self.spill = Some(RefCell::new(tempfile::tempfile()?));
            }
            let mut f = self.spill.as_ref().expect("spill file").borrow_mut();
            let bytes: Vec<u8> = state.iter().flat_map(|v| v.to_le_bytes()).collect();
            f.seek(SeekFrom::End(0))?;
            f.write_all(&bytes)?;
        }
        self.times.push(t);
        Ok(())
    }

    pub fn state(&self, n: usize) -> Result<Vec<f64>> {
        if n >= self.times.len() {
            return Err(Error::Trajectory(format!(
                "state {n} requested, {} stored",
                self.times.len()
            )));
        }
        if let Some(s) = self.memory.get(n) {
            return Ok(s.clone());
        }
        let offset = ((n - self.memory.len()) * self.len * 8) as u64;
        let mut f = self.spill.as_ref().expect("spill file").borrow_mut();
        f.seek(SeekFrom::Start(offset))?;
        let mut bytes = vec![0u8; self.len * 8];
        f.read_exact(&mut bytes)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }

    pub fn last(&self) -> Result<Vec<f64>> {
        match self.times.len() {
            0 => Err(Error::Trajectory("empty trajectory".into())),
            n => self.state(n - 1),
        }
    }
}

/// Everything the forward loop needs besides the control.
#[derive(Clone, Copy)]
pub struct ForwardModel<'a> {
    pub assembler: &'a Assembler,
    pub dofmap: &'a DofMap,
    pub inflow: &'a InflowProfile,
    pub scheme: ThetaScheme,
    pub newton: &'a NewtonSettings,
    /// Bytes of trajectory kept in memory.
    pub memory_budget: usize,
}

pub struct ForwardRun {
    pub trajectory: Trajectory,
    pub reports: Vec<NewtonReport>,
    /// Smallest `J` over all accepted states.
    pub min_jacobian: f64,
}

/// One time step `R(U) = R_n(U, U_old; q)` as a Newton system.
pub struct StepSystem<'a> {
    pub assembler: &'a Assembler,
    pub old: &'a [f64],
    pub q: f64,
    pub weights: Weights,
}

impl NonlinearSystem for StepSystem<'_> {
    fn residual(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        self.assembler.residual(x, self.old, self.q, &self.weights)
    }

    fn jacobian(&mut self, x: &[f64]) -> Result<SparseOperator> {
        self.assembler.jacobian(x, self.old, self.q, &self.weights)
    }
}

/// Runs `N` steps from `u0`, calling `observe(n, t, U^n)` for every state
/// including the initial one.
pub fn run_forward_with(
    model: &ForwardModel,
    q: f64,
    u0: &[f64],
    mut observe: impl FnMut(usize, f64, &[f64]) -> Result<()>,
) -> Result<ForwardRun> {
    let scheme = model.scheme;
    scheme.validate()?;
    let mut traj = Trajectory::new(u0.len(), model.memory_budget);
    traj.push(0.0, u0)?;
    observe(0, 0.0, u0)?;
    let mut solver = DirectSolver::new();
    let mut reports = Vec::with_capacity(scheme.steps);
    let mut old = u0.to_vec();
    let mut min_j = model.assembler.min_jacobian(u0).0;
    for n in 1..=scheme.steps {
        let t = scheme.time(n);
        let wrap = |e: Error| Error::TimeStep {
            step: n,
            time: t,
            source: Box::new(e),
        };
        let mut u = old.clone();
        model.dofmap.impose(&mut u, model.inflow, t);
        let mut sys = StepSystem {
            assembler: model.assembler,
            old: &old,
            q,
            weights: scheme.weights(),
        };
        let report = newton::solve(&mut sys, &mut u, model.newton, &mut solver).map_err(wrap)?;
        let (j, cell) = model.assembler.min_jacobian(&u);
        if !(j > 0.0) {
            return Err(wrap(Error::MeshEntanglement { cell, jacobian: j }));
        }
        min_j = min_j.min(j);
        log::debug!(
            "step {n} t = {t:.6}: {} Newton iterations, |R| {:.3e} -> {:.3e}",
            report.iterations,
            report.initial_residual,
            report.final_residual
        );
        traj.push(t, &u)?;
        observe(n, t, &u)?;
        reports.push(report);
        old = u;
    }
    Ok(ForwardRun {
        trajectory: traj,
        reports,
        min_jacobian: min_j,
    })
}

pub fn run_forward(model: &ForwardModel, q: f64, u0: &[f64]) -> Result<ForwardRun> {
    run_forward_with(model, q, u0, |_, _, _| Ok(()))
}
