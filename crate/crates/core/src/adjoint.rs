//! Backward adjoint sweep and the reduced gradient.
//!
//! With `R_n(U^n, U^{n−1}; q) = 0` for every step and `J = J(U^N, q)`, the
//! adjoint states solve
//!
//! ```text
//! A_nᵀ Z^n = ∂J/∂U^n − B_{n+1}ᵀ Z^{n+1},   A_n = ∂R_n/∂U^n,  B_{n+1} = ∂R_{n+1}/∂U^n
//! ```
//!
//! backwards from `n = N`, and `dJ/dq = ∂J/∂q − Σ_n Z^n · ∂R_n/∂q`.

use crate::error::{Error, Result};
use crate::functionals::BoundFunctional;
use crate::linalg::{dot, DirectSolver};
use crate::timestepper::{ForwardModel, Trajectory};

/// `Z^1…Z^N`; entry `n − 1` holds `Z^n`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AdjointTrajectory {
    pub states: Vec<Vec<f64>>,
}

/// Solves the adjoint recursion. `final_source` is `∂J/∂U^N`; the
/// functionals used here do not depend on earlier states.
pub fn run_adjoint(
    model: &ForwardModel,
    traj: &Trajectory,
    q: f64,
    final_source: &[f64],
) -> Result<AdjointTrajectory> {
    let steps = model.scheme.steps;
    if traj.num_states() != steps + 1 {
        return Err(Error::Trajectory(format!(
            "adjoint needs {} states, trajectory has {}",
            steps + 1,
            traj.num_states()
        )));
    }
    let a = model.assembler;
    if final_source.len() != a.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: final_source.len(),
        });
    }
    let w = model.scheme.weights();
    let mut solver = DirectSolver::new();
    let mut states = vec![Vec::new(); steps];
    let mut next: Option<(Vec<f64>, Vec<f64>)> = None; // (U^{n+1}, Z^{n+1})
    let mut current = traj.state(steps)?;
    for n in (1..=steps).rev() {
        let previous = traj.state(n - 1)?;
        let mut rhs = if n == steps {
            final_source.to_vec()
        } else {
            vec![0.0; a.len()]
        };
        if let Some((u_next, z_next)) = &next {
            let b = a.cross_jacobian(u_next, &current, q, &w)?;
            for (r, v) in rhs.iter_mut().zip(b.matvec_transposed(z_next)) {
                *r -= v;
            }
        }
        a.zero_constrained(&mut rhs);
        let jac = a.jacobian(&current, &previous, q, &w)?;
        let z = solver.factorize(&jac)?.solve_transposed(&rhs)?;
        states[n - 1] = z.clone();
        next = Some((current, z));
        current = previous;
    }
    Ok(AdjointTrajectory { states })
}

/// `∂J/∂q − Σ_n Z^n · ∂R_n/∂q`.
pub fn reduced_gradient(
    model: &ForwardModel,
    traj: &Trajectory,
    adjoint: &AdjointTrajectory,
    q: f64,
    functional: &BoundFunctional,
) -> Result<f64> {
    let steps = model.scheme.steps;
    if adjoint.states.len() != steps || traj.num_states() != steps + 1 {
        return Err(Error::Trajectory(format!(
            "gradient needs {steps} adjoint and {} primal states, got {} and {}",
            steps + 1,
            adjoint.states.len(),
            traj.num_states()
        )));
    }
    let w = model.scheme.weights();
    let mut g = functional.control_derivative(q);
    let mut previous = traj.state(0)?;
    for n in 1..=steps {
        let current = traj.state(n)?;
        let dr = model.assembler.control_derivative(&current, &previous, q, &w)?;
        g -= dot(&adjoint.states[n - 1], &dr);
        previous = current;
    }
    Ok(g)
}
