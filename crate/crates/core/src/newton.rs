//! Residual-based Newton method with backtracking and Jacobian reuse.

use crate::error::{Error, Result};
use crate::linalg::{norm, DirectSolver, Factorization, SparseOperator};

/// A square nonlinear system `R(x) = 0`.
pub trait NonlinearSystem {
    fn residual(&mut self, x: &[f64]) -> Result<Vec<f64>>;
    fn jacobian(&mut self, x: &[f64]) -> Result<SparseOperator>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonSettings {
    /// Relative tolerance on the residual norm.
    pub tol: f64,
    /// Absolute floor; also the threshold below which a guess is accepted
    /// unchanged.
    pub abs_floor: f64,
    pub max_iterations: usize,
    pub backtrack: f64,
    /// Maximum number of step reductions `l_M`.
    pub max_backtracks: usize,
    /// A contraction ratio inside this band triggers a Jacobian rebuild.
    pub rebuild_band: [f64; 2],
    /// `false` rebuilds the Jacobian at every iteration.
    pub reuse: bool,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            abs_floor: 1e-12,
            max_iterations: 30,
            backtrack: 0.6,
            max_backtracks: 5,
            rebuild_band: [1e-3, 1.0],
            reuse: true,
        }
    }
}

impl NewtonSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::Config(format!("newton.tol must lie in (0, 1), got {}", self.tol)));
        }
        if self.max_backtracks == 0 {
            return Err(Error::Config("newton.max_backtracks must be at least 1".into()));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::Config(format!(
                "newton.backtrack must lie in (0, 1), got {}",
                self.backtrack
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Residual norm after the accepted step.
    pub residual: f64,
    pub lambda: f64,
    /// Whether the Jacobian used for this step was freshly assembled.
    pub rebuilt: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct NewtonReport {
    pub initial_residual: f64,
    pub final_residual: f64,
    pub iterations: usize,
    pub jacobian_builds: usize,
    pub history: Vec<IterationRecord>,
}

impl NewtonReport {
    /// `‖R^{k+1}‖ / ‖R^k‖` for every accepted step.
    pub fn contraction_ratios(&self) -> Vec<f64> {
        let mut prev = self.initial_residual;
        self.history
            .iter()
            .map(|r| {
                let q = r.residual / prev;
                prev = r.residual;
                q
            })
            .collect()
    }
}

/// Trial residual norm; an entangled mesh or a non-finite residual counts
/// as a rejected step rather than a hard failure.
fn trial<S: NonlinearSystem>(sys: &mut S, x: &[f64]) -> Result<Option<(Vec<f64>, f64)>> {
    match sys.residual(x) {
        Ok(r) => {
            let n = norm(&r);
            Ok(n.is_finite().then_some((r, n)))
        }
        Err(Error::MeshEntanglement { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Solves `R(x) = 0` starting from `x`, which is overwritten with the
/// solution. Steps are `x + λδ` with `λ = 1, β, β², …, β^{l_M}`; a step is
/// accepted only if it lowers the residual norm.
pub fn solve<S: NonlinearSystem>(
    sys: &mut S,
    x: &mut [f64],
    settings: &NewtonSettings,
    solver: &mut DirectSolver,
) -> Result<NewtonReport> {
    let mut r = sys.residual(x)?;
    let mut rn = norm(&r);
    let mut report = NewtonReport {
        initial_residual: rn,
        final_residual: rn,
        ..Default::default()
    };
    if !rn.is_finite() {
        return Err(Error::NewtonNonConvergence {
            iterations: 0,
            residual: rn,
            target: settings.abs_floor,
        });
    }
    let target = (settings.tol * rn).max(settings.abs_floor);
    if rn <= target {
        return Ok(report);
    }
    let mut lu: Option<Factorization> = None;
    let mut rebuild = true;
    for it in 1..=settings.max_iterations {
        let mut fresh = false;
        if rebuild || lu.is_none() || !settings.reuse {
            lu = Some(solver.factorize(&sys.jacobian(x)?)?);
            report.jacobian_builds += 1;
            fresh = true;
        }
        let accepted = loop {
            let neg: Vec<f64> = r.iter().map(|v| -v).collect();
            let dx = lu.as_ref().expect("factorized").solve(&neg)?;
            let mut found = None;
            let mut lambda = 1.0;
            for l in 0..=settings.max_backtracks {
                if l > 0 {
                    lambda *= settings.backtrack;
                }
                let xt: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + lambda * d).collect();
                if let Some((rt, nt)) = trial(sys, &xt)? {
                    if nt < rn {
                        found = Some((xt, rt, nt, lambda));
                        break;
                    }
                }
            }
            match found {
                Some(f) => break Some(f),
                // a stale matrix gets one fresh attempt before giving up
                None if !fresh => {
                    lu = Some(solver.factorize(&sys.jacobian(x)?)?);
                    report.jacobian_builds += 1;
                    fresh = true;
                }
                None => break None,
            }
        };
        let Some((xt, rt, nt, lambda)) = accepted else {
            report.final_residual = rn;
            return Err(Error::LineSearchFailure {
                iteration: it,
                residual: rn,
            });
        };
        let ratio = nt / rn;
        x.copy_from_slice(&xt);
        r = rt;
        rn = nt;
        log::debug!("newton {it}: |R| = {rn:.3e}, lambda = {lambda}, rebuilt = {fresh}");
        report.history.push(IterationRecord {
            iteration: it,
            residual: rn,
            lambda,
            rebuilt: fresh,
        });
        report.iterations = it;
        report.final_residual = rn;
        if rn <= target {
            return Ok(report);
        }
        let [lo, hi] = settings.rebuild_band;
        rebuild = lambda < 1.0 || (lo..=hi).contains(&ratio);
    }
    Err(Error::NewtonNonConvergence {
        iterations: settings.max_iterations,
        residual: rn,
        target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Componentwise `f(x_i) = 0` with a diagonal Jacobian.
    struct Diagonal<F, G> {
        f: F,
        df: G,
        evaluations: usize,
    }

    impl<F: Fn(f64, usize) -> f64, G: Fn(f64, usize) -> f64> NonlinearSystem for Diagonal<F, G> {
        fn residual(&mut self, x: &[f64]) -> Result<Vec<f64>> {
            self.evaluations += 1;
            Ok(x.iter().enumerate().map(|(i, &v)| (self.f)(v, i)).collect())
        }
        fn jacobian(&mut self, x: &[f64]) -> Result<SparseOperator> {
            let t: Vec<_> = x.iter().enumerate().map(|(i, &v)| (i, i, (self.df)(v, i))).collect();
            Ok(SparseOperator::from_triplets(x.len(), &t))
        }
    }

    fn diag<F: Fn(f64, usize) -> f64, G: Fn(f64, usize) -> f64>(f: F, df: G) -> Diagonal<F, G> {
        Diagonal { f, df, evaluations: 0 }
    }

    struct Linear(SparseOperator, Vec<f64>);

    impl NonlinearSystem for Linear {
        fn residual(&mut self, x: &[f64]) -> Result<Vec<f64>> {
            Ok(self.0.matvec(x).iter().zip(&self.1).map(|(a, b)| a - b).collect())
        }
        fn jacobian(&mut self, _: &[f64]) -> Result<SparseOperator> {
            Ok(self.0.clone())
        }
    }

    #[test]
    fn linear_system_in_one_full_step() {
        let a = SparseOperator::from_dense(&[vec![4.0, 1.0], vec![2.0, 3.0]]);
        let mut sys = Linear(a, vec![1.0, 2.0]);
        let mut x = vec![0.0; 2];
        let rep = solve(&mut sys, &mut x, &NewtonSettings::default(), &mut DirectSolver::new()).unwrap();
        assert_eq!(rep.iterations, 1);
        assert_eq!(rep.history[0].lambda, 1.0);
        assert!((x[0] - 0.1).abs() < 1e-14 && (x[1] - 0.6).abs() < 1e-14);
    }

    #[test]
    fn exact_guess_is_returned_unchanged() {
        let mut sys = diag(|x, _| x * x - 4.0, |x, _| 2.0 * x);
        let mut x = vec![2.0, -2.0];
        let rep = solve(&mut sys, &mut x, &NewtonSettings::default(), &mut DirectSolver::new()).unwrap();
        assert_eq!(rep.iterations, 0);
        assert_eq!(x, vec![2.0, -2.0]);
    }

    #[test]
    fn quadratic_convergence_with_fresh_jacobians() {
        let mut sys = diag(|x, _| x * x - 2.0, |x, _| 2.0 * x);
        let mut x = vec![3.0];
        let settings = NewtonSettings {
            reuse: false,
            tol: 1e-14,
            ..Default::default()
        };
        let rep = solve(&mut sys, &mut x, &settings, &mut DirectSolver::new()).unwrap();
        assert!((x[0] - 2f64.sqrt()).abs() < 1e-12);
        let q = rep.contraction_ratios();
        assert!(q.windows(2).all(|w| w[1] < w[0]), "{q:?}");
        assert!(rep.history.iter().all(|h| h.lambda == 1.0 && h.rebuilt));
    }

    #[test]
    fn backtracking_tames_arctangent() {
        // full Newton steps on atan diverge from |x| > 1.39
        let mut sys = diag(|x, _| x.atan(), |x, _| 1.0 / (1.0 + x * x));
        let mut x = vec![3.0];
        let rep = solve(&mut sys, &mut x, &NewtonSettings::default(), &mut DirectSolver::new()).unwrap();
        assert!(x[0].abs() < 1e-8);
        assert!(rep.history[0].lambda < 1.0);
        let res: Vec<f64> = rep.history.iter().map(|h| h.residual).collect();
        assert!(res.windows(2).all(|w| w[1] < w[0]));
        assert!(res[0] < rep.initial_residual);
    }

    #[test]
    fn no_root_is_a_line_search_failure() {
        let mut sys = diag(|x, _| x * x + 1.0, |x, _| 2.0 * x);
        let mut x = vec![1e-3];
        let err = solve(&mut sys, &mut x, &NewtonSettings::default(), &mut DirectSolver::new()).unwrap_err();
        assert!(matches!(err, Error::LineSearchFailure { .. }), "{err}");
    }

    #[test]
    fn iteration_budget() {
        let mut sys = diag(|x, _| x.powi(9) - 1.0, |x, _| 9.0 * x.powi(8));
        let mut x = vec![2.5];
        let settings = NewtonSettings {
            max_iterations: 3,
            ..Default::default()
        };
        let err = solve(&mut sys, &mut x, &settings, &mut DirectSolver::new()).unwrap_err();
        assert!(matches!(err, Error::NewtonNonConvergence { iterations: 3, .. }));
    }

    #[test]
    fn fast_contraction_reuses_the_matrix() {
        // nearly linear: steps contract by far more than 10³, so the
        // Jacobian from the first iteration is kept
        let mut sys = diag(|x, i| (i as f64 + 2.0) * x + 1e-9 * x * x * x - 1.0, |x, i| i as f64 + 2.0 + 3e-9 * x * x);
        let mut x = vec![0.0; 4];
        let settings = NewtonSettings {
            tol: 1e-15,
            ..Default::default()
        };
        let rep = solve(&mut sys, &mut x, &settings, &mut DirectSolver::new()).unwrap();
        assert!(rep.iterations >= 2, "{rep:?}");
        assert_eq!(rep.jacobian_builds, 1);
        assert!(!rep.history[1].rebuilt);
    }

    #[test]
    fn settings_validation() {
        assert!(NewtonSettings::default().validate().is_ok());
        let bad = NewtonSettings {
            tol: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
