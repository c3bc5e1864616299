//! Reduced functional, gradient check and the Armijo gradient method.

use std::fmt::Write as _;
use std::time::Instant;

use crate::adjoint::{reduced_gradient, run_adjoint};
use crate::error::{Error, Result};
use crate::forms::check_control;
use crate::functionals::BoundFunctional;
use crate::linalg::norm;
use crate::timestepper::{run_forward, ForwardModel, ForwardRun};

/// `q ↦ J(q, U(q))`.
pub trait ReducedFunctional {
    fn value(&mut self, q: &[f64]) -> Result<f64>;
    /// Value and gradient.
    fn gradient(&mut self, q: &[f64]) -> Result<(f64, Vec<f64>)>;
    /// Seconds spent in forward and adjoint solves since the last call.
    fn take_timings(&mut self) -> (f64, f64) {
        (0.0, 0.0)
    }
}

/// The FSI reduced functional. The last forward run is cached so that the
/// gradient at an accepted Armijo trial does not repeat the forward solve.
pub struct FsiReduced<'a> {
    pub model: ForwardModel<'a>,
    pub functional: &'a BoundFunctional,
    pub initial: Vec<f64>,
    cache: Option<(f64, ForwardRun)>,
    forward_seconds: f64,
    adjoint_seconds: f64,
    /// Every forward run performed, as `(q, run)` summaries for diagnostics.
    pub on_forward: Option<Box<dyn FnMut(f64, &ForwardRun) + 'a>>,
}

impl<'a> FsiReduced<'a> {
    pub fn new(model: ForwardModel<'a>, functional: &'a BoundFunctional, initial: Vec<f64>) -> Self {
        Self {
            model,
            functional,
            initial,
            cache: None,
            forward_seconds: 0.0,
            adjoint_seconds: 0.0,
            on_forward: None,
        }
    }

    /// Forward run at `q`, reusing the cached one when `q` matches exactly.
    pub fn forward(&mut self, q: f64) -> Result<&ForwardRun> {
        let hit = matches!(&self.cache, Some((cq, _)) if cq.to_bits() == q.to_bits());
        if !hit {
            let start = Instant::now();
            let run = run_forward(&self.model, q, &self.initial).map_err(|e| Error::ForwardFailure {
                q: vec![q],
                source: Box::new(e),
            })?;
            self.forward_seconds += start.elapsed().as_secs_f64();
            if let Some(cb) = self.on_forward.as_mut() {
                cb(q, &run);
            }
            self.cache = Some((q, run));
        }
        Ok(&self.cache.as_ref().expect("cached run").1)
    }
}

impl ReducedFunctional for FsiReduced<'_> {
    fn value(&mut self, q: &[f64]) -> Result<f64> {
        let q = check_control(q)?;
        let f = self.functional;
        let last = self.forward(q)?.trajectory.last()?;
        f.value(&last, q)
    }

    fn gradient(&mut self, q: &[f64]) -> Result<(f64, Vec<f64>)> {
        let q = check_control(q)?;
        let f = self.functional;
        let model = self.model;
        self.forward(q)?;
        let run = &self.cache.as_ref().expect("cached run").1;
        let last = run.trajectory.last()?;
        let value = f.value(&last, q)?;
        let start = Instant::now();
        let adj = run_adjoint(&model, &run.trajectory, q, &f.state_derivative(&last)?)?;
        let g = reduced_gradient(&model, &run.trajectory, &adj, q, f)?;
        self.adjoint_seconds += start.elapsed().as_secs_f64();
        Ok((value, vec![g]))
    }

    fn take_timings(&mut self) -> (f64, f64) {
        let t = (self.forward_seconds, self.adjoint_seconds);
        self.forward_seconds = 0.0;
        self.adjoint_seconds = 0.0;
        t
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerSettings {
    pub gamma: f64,
    pub beta: f64,
    /// Stop when `‖∇J‖ < tol_abs`.
    pub tol_abs: f64,
    /// Stop when `‖∇J(q^k)‖ / ‖∇J(q⁰)‖ < tol_rel`.
    pub tol_rel: f64,
    pub max_iterations: usize,
    pub max_trials: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            gamma: 1e-4,
            beta: 0.5,
            tol_abs: 1e-8,
            tol_rel: 1e-6,
            max_iterations: 30,
            max_trials: 30,
        }
    }
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 0.5) {
            return Err(Error::Config(format!("optimizer.gamma must lie in (0, 0.5), got {}", self.gamma)));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::Config(format!("optimizer.beta must lie in (0, 1), got {}", self.beta)));
        }
        if self.max_trials == 0 {
            return Err(Error::Config("optimizer.max_trials must be at least 1".into()));
        }
        Ok(())
    }
}

/// One iterate `q^k` and the step taken from it.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationLog {
    pub k: usize,
    pub value: f64,
    pub q: Vec<f64>,
    pub grad_norm: f64,
    /// `‖∇J(q^k)‖ / ‖∇J(q⁰)‖`.
    pub normalized: f64,
    /// Accepted step length `β^l`, if a step was taken from this iterate.
    pub step: Option<f64>,
    /// Armijo trials (forward solves) spent on the step.
    pub trials: usize,
    /// `J(q^k) − γ β_k ‖∇J(q^k)‖²`, the bound the next value had to meet.
    pub armijo_bound: Option<f64>,
    pub forward_seconds: f64,
    pub adjoint_seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OptimizationLog {
    pub records: Vec<IterationLog>,
    pub converged: bool,
}

impl OptimizationLog {
    pub const CSV_HEADER: &'static str =
        "iter,J,q,grad_norm,grad_rel,beta_k,trials,armijo_bound,forward_s,adjoint_s";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.12e}")).unwrap_or_default();
        for r in &self.records {
            let q: Vec<String> = r.q.iter().map(|v| format!("{v:.12e}")).collect();
            writeln!(
                s,
                "{},{:.12e},{},{:.12e},{:.12e},{},{},{},{:.3},{:.3}",
                r.k,
                r.value,
                q.join(";"),
                r.grad_norm,
                r.normalized,
                opt(r.step),
                r.trials,
                opt(r.armijo_bound),
                r.forward_seconds,
                r.adjoint_seconds
            )
            .expect("string write");
        }
        s
    }

    /// Checks the Armijo inequality of every accepted step against the
    /// logged values.
    pub fn armijo_holds(&self) -> bool {
        self.records
            .windows(2)
            .all(|w| w[0].armijo_bound.is_some_and(|b| w[1].value <= b))
    }
}

/// Algorithm: `q^{k+1} = q^k − β^l ∇J(q^k)` with the smallest `l` such that
/// `J(q^{k+1}) ≤ J(q^k) − γ β^l ‖∇J(q^k)‖²`. Trial controls outside the
/// admissible set count as rejected trials.
pub fn gradient_method<F: ReducedFunctional>(
    f: &mut F,
    q0: &[f64],
    settings: &OptimizerSettings,
) -> Result<(Vec<f64>, OptimizationLog)> {
    settings.validate()?;
    let mut log = OptimizationLog::default();
    let mut q = q0.to_vec();
    let (mut value, mut grad) = f.gradient(&q)?;
    let g0 = norm(&grad);
    for k in 0..=settings.max_iterations {
        let gn = norm(&grad);
        let (fw, ad) = f.take_timings();
        log.records.push(IterationLog {
            k,
            value,
            q: q.clone(),
            grad_norm: gn,
            normalized: if g0 > 0.0 { gn / g0 } else { 0.0 },
            step: None,
            trials: 0,
            armijo_bound: None,
            forward_seconds: fw,
            adjoint_seconds: ad,
        });
        log::info!("iter {k}: J = {value:.6e}, q = {q:?}, |grad| = {gn:.6e}");
        if gn < settings.tol_abs || (g0 > 0.0 && gn / g0 < settings.tol_rel) {
            log.converged = true;
            return Ok((q, log));
        }
        if k == settings.max_iterations {
            break;
        }
        let mut step = 1.0;
        let mut accepted = None;
        for trial in 1..=settings.max_trials {
            let qt: Vec<f64> = q.iter().zip(&grad).map(|(a, g)| a - step * g).collect();
            let bound = value - settings.gamma * step * gn * gn;
            let vt = match f.value(&qt) {
                Ok(v) => Some(v),
                Err(Error::InvalidControl(_)) => None,
                Err(e) => return Err(e),
            };
            if let Some(vt) = vt.filter(|v| *v <= bound) {
                accepted = Some((qt, vt, trial, bound));
                break;
            }
            step *= settings.beta;
        }
        let Some((qt, _, trials, bound)) = accepted else {
            return Err(Error::ArmijoFailure {
                iteration: k,
                trials: settings.max_trials,
                value,
                grad_norm: gn,
            });
        };
        let rec = log.records.last_mut().expect("record");
        rec.step = Some(step);
        rec.trials = trials;
        rec.armijo_bound = Some(bound);
        q = qt;
        (value, grad) = f.gradient(&q)?;
    }
    Ok((q, log))
}

/// One row of a finite-difference comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct FdRow {
    pub h: f64,
    pub fd: f64,
    pub adjoint: f64,
    pub rel_error: f64,
}

/// Central differences of `f` in the first control component for steps
/// `h = s·|q|`, compared with the adjoint gradient. Steps that leave the
/// admissible set (`q − h ≤ 0`) give a row of NaNs.
pub fn gradient_check<F: ReducedFunctional>(f: &mut F, q: &[f64], relative_steps: &[f64]) -> Result<Vec<FdRow>> {
    let (_, g) = f.gradient(q)?;
    let mut rows = Vec::with_capacity(relative_steps.len());
    for &s in relative_steps {
        let h = s * q[0].abs();
        let mut qp = q.to_vec();
        let mut qm = q.to_vec();
        qp[0] += h;
        qm[0] -= h;
        if check_control(&qm).is_err() {
            rows.push(FdRow {
                h,
                fd: f64::NAN,
                adjoint: g[0],
                rel_error: f64::NAN,
            });
            continue;
        }
        let fd = (f.value(&qp)? - f.value(&qm)?) / (2.0 * h);
        rows.push(FdRow {
            h,
            fd,
            adjoint: g[0],
            rel_error: (fd - g[0]).abs() / g[0].abs().max(fd.abs()).max(f64::MIN_POSITIVE),
        });
    }
    Ok(rows)
}

/// Smallest relative error over the admissible steps.
pub fn min_error(rows: &[FdRow]) -> f64 {
    rows.iter().map(|r| r.rel_error).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `½a(q − c)²` with an optional forbidden region.
    struct Quadratic {
        a: f64,
        c: f64,
        calls: usize,
    }

    impl ReducedFunctional for Quadratic {
        fn value(&mut self, q: &[f64]) -> Result<f64> {
            self.calls += 1;
            check_control(q)?;
            Ok(0.5 * self.a * (q[0] - self.c).powi(2))
        }
        fn gradient(&mut self, q: &[f64]) -> Result<(f64, Vec<f64>)> {
            Ok((self.value(q)?, vec![self.a * (q[0] - self.c)]))
        }
    }

    #[test]
    fn unit_quadratic_is_solved_by_one_full_step() {
        let mut f = Quadratic { a: 1.0, c: 5e5, calls: 0 };
        let (q, log) = gradient_method(&mut f, &[5000.0], &OptimizerSettings::default()).unwrap();
        assert_eq!(q, vec![5e5]);
        assert!(log.converged);
        assert_eq!(log.records.len(), 2);
        assert_eq!(log.records[0].step, Some(1.0));
        assert!((log.records[0].value - 1.225125e11).abs() < 1.0);
        assert!(log.armijo_holds());
    }

    #[test]
    fn steep_quadratic_backtracks_and_descends() {
        let mut f = Quadratic { a: 3.0, c: 2.0, calls: 0 };
        let settings = OptimizerSettings {
            max_iterations: 60,
            ..Default::default()
        };
        let (q, log) = gradient_method(&mut f, &[1.0], &settings).unwrap();
        assert!((q[0] - 2.0).abs() < 1e-6);
        assert!(log.records.windows(2).all(|w| w[1].value < w[0].value));
        assert!(log.records.iter().filter_map(|r| r.step).all(|s| s < 1.0));
        assert!(log.armijo_holds());
    }

    #[test]
    fn inadmissible_trials_are_rejected() {
        // full step would give q = −1
        let mut f = Quadratic { a: 2.0, c: 0.5, calls: 0 };
        let settings = OptimizerSettings {
            max_iterations: 3,
            ..Default::default()
        };
        let (_, log) = gradient_method(&mut f, &[1.0], &settings).unwrap();
        assert!(log.records[0].trials >= 2);
        assert!(log.records.iter().all(|r| r.q[0] > 0.0));
    }

    #[test]
    fn trial_budget_exhaustion() {
        let mut f = Quadratic { a: 1e12, c: 0.5, calls: 0 };
        let settings = OptimizerSettings {
            max_trials: 3,
            ..Default::default()
        };
        let err = gradient_method(&mut f, &[1.0], &settings).unwrap_err();
        assert!(matches!(err, Error::ArmijoFailure { trials: 3, .. }));
    }

    #[test]
    fn scaled_functional_has_the_same_direction() {
        let mut a = Quadratic { a: 1.0, c: 3.0, calls: 0 };
        let mut b = Quadratic { a: 7.0, c: 3.0, calls: 0 };
        let (_, ga) = a.gradient(&[1.0]).unwrap();
        let (_, gb) = b.gradient(&[1.0]).unwrap();
        assert_eq!(ga[0].signum(), gb[0].signum());
    }

    #[test]
    fn fd_check_on_quadratic_is_exact() {
        let mut f = Quadratic { a: 2.0, c: 3.0, calls: 0 };
        let rows = gradient_check(&mut f, &[1.0], &[1e-2, 1e-1, 1.0, 10.0]).unwrap();
        assert!(min_error(&rows) < 1e-12);
        assert!(rows[2].fd.is_nan() && rows[3].rel_error.is_nan());
    }

    #[test]
    fn csv_layout() {
        let mut f = Quadratic { a: 1.0, c: 4.0, calls: 0 };
        let (_, log) = gradient_method(&mut f, &[1.0], &OptimizerSettings::default()).unwrap();
        let csv = log.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), OptimizationLog::CSV_HEADER);
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), 10);
        assert_eq!(first[0], "0");
        assert_eq!(first[5], "1.000000000000e0");
    }
}
