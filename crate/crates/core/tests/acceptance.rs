//! Acceptance run: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines show up in `cargo test` output.

use std::cell::RefCell;
use std::rc::Rc;
use std::time::Instant;

use fsiopt::forms::Weights;
use fsiopt::linalg::norm;
use fsiopt::newton::NewtonReport;
use fsiopt::optimize::{gradient_check, gradient_method, min_error, OptimizationLog};
use fsiopt::problems::{beam_config, flapping_config, fsi1_config, Problem, ProblemConfig};
use fsiopt::timestepper::{SchemeKind, ThetaScheme};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Summary of every forward solve done during an optimization.
#[derive(Default)]
struct ForwardStats {
    runs: usize,
    min_jacobian: f64,
    reports: Vec<NewtonReport>,
}

struct Optimization {
    log: OptimizationLog,
    stats: ForwardStats,
    seconds: f64,
}

fn optimize(config: &ProblemConfig) -> Optimization {
    let start = Instant::now();
    let p = config.build().expect("build");
    let stats = Rc::new(RefCell::new(ForwardStats {
        min_jacobian: f64::INFINITY,
        ..Default::default()
    }));
    let mut f = p.reduced();
    let sink = stats.clone();
    f.on_forward = Some(Box::new(move |_, run| {
        let mut s = sink.borrow_mut();
        s.runs += 1;
        s.min_jacobian = s.min_jacobian.min(run.min_jacobian);
        s.reports.extend(run.reports.iter().cloned());
    }));
    let (_, log) = gradient_method(&mut f, &[config.q0], &config.optimizer).expect("optimization");
    drop(f);
    let stats = Rc::try_unwrap(stats).ok().expect("sole owner").into_inner();
    Optimization {
        log,
        stats,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn criterion1() -> Outcome {
    let start = Instant::now();
    let mut c = fsi1_config();
    c.scheme.steps = 3;
    c.alpha = 0.0;
    let p = c.build().expect("build");
    let mut f = p.reduced();
    let rows = gradient_check(&mut f, &[4e5], &[1e-2, 1e-1, 1.0, 10.0]).expect("gradient check");
    let best = min_error(&rows);
    let table: Vec<String> = rows.iter().map(|r| format!("h={:.0e}: {:.2e}", r.h, r.rel_error)).collect();
    outcome(
        best <= 1e-3 && start.elapsed().as_secs_f64() <= 300.0,
        format!(
            "adjoint gradient {:.9e}, best central FD rel error {best:.3e} <= 1e-3 [{}] ({:.1} s)",
            rows[0].adjoint,
            table.join(", "),
            start.elapsed().as_secs_f64()
        ),
    )
}

fn criterion2(run: &Optimization) -> Outcome {
    let r = &run.log.records;
    let j0 = r[0].value;
    let q1 = r[1].q[0];
    let within = r.iter().position(|x| (x.q[0] - 5e5).abs() / 5e5 < 1e-3);
    // the bounds are stated to three significant figures; a full first
    // step lands on q_d minus the (tiny) state gradient
    let q1_3sf = (q1 / 1e3).round() * 1e3;
    let pass = (1.20e11..=1.23e11).contains(&j0)
        && (4.90e5..=5.00e5).contains(&q1_3sf)
        && within.is_some_and(|k| k <= 6)
        && run.seconds <= 1800.0;
    outcome(
        pass,
        format!(
            "J(q0) = {j0:.6e}, q1 = {q1:.9e} (q1 - 5e5 = {:.3e}, {q1_3sf:.2e} to 3 s.f.), |q-5e5|/5e5 < 1e-3 at iteration {}, final q = {:.6e} ({:.1} s)",
            q1 - 5e5,
            within.map_or("never".into(), |k| k.to_string()),
            r.last().unwrap().q[0],
            run.seconds
        ),
    )
}

fn criterion3(run: &Optimization) -> Outcome {
    let r = &run.log.records;
    let n1 = r[1].normalized;
    let monotone = r.windows(2).all(|w| w[1].normalized < w[0].normalized);
    let trail: Vec<String> = r.iter().map(|x| format!("{:.5}", x.normalized)).collect();
    outcome(
        (0.88..=0.92).contains(&n1) && monotone && r.len() == 6 && run.seconds <= 1800.0,
        format!(
            "normalized gradients [{}], after iteration 1: {n1:.5} in [0.88, 0.92] ({:.1} s)",
            trail.join(", "),
            run.seconds
        ),
    )
}

fn criterion4(run: &Optimization, tol: f64, floor: f64) -> Outcome {
    let reports = &run.stats.reports;
    let max_it = reports.iter().map(|r| r.iterations).max().unwrap_or(0);
    let converged = reports
        .iter()
        .all(|r| r.final_residual <= (tol * r.initial_residual).max(floor));
    let contracting = reports.iter().all(|r| r.contraction_ratios().iter().all(|&c| c < 1.0));
    let worst = reports
        .iter()
        .flat_map(|r| r.contraction_ratios())
        .fold(0.0, f64::max);
    outcome(
        max_it <= 10 && converged && contracting,
        format!(
            "{} forward solves, {} time steps: max {max_it} Newton iterations, all within tol {tol:e} (floor {floor:e}), largest contraction ratio {worst:.3e}",
            run.stats.runs,
            reports.len()
        ),
    )
}

fn criterion5() -> Outcome {
    let start = Instant::now();
    let p = fsi1_config_fixed(1).build().expect("build");
    let a = &p.assembler;
    let n = a.len();
    let w = Weights::one_step_theta(0.5 + 1e-2, 1e-2);
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let dm = &p.dofmap;
    let random_state = |rng: &mut ChaCha8Rng, scale: [f64; 3]| -> Vec<f64> {
        use fsiopt::fem::Field;
        let mut x = vec![0.0; n];
        for (f, s) in [(Field::Velocity, scale[0]), (Field::Displacement, scale[1]), (Field::Pressure, scale[2])] {
            let o = dm.offset(f);
            for v in &mut x[o..o + dm.field_len(f)] {
                *v = s * rng.gen_range(-1.0..1.0);
            }
        }
        x
    };
    let mut worst: f64 = 0.0;
    let mut states = 0;
    while states < 5 {
        let u = random_state(&mut rng, [0.3, 2e-3, 50.0]);
        let old = random_state(&mut rng, [0.3, 2e-3, 50.0]);
        if a.min_jacobian(&u).0 <= 0.0 || a.min_jacobian(&old).0 <= 0.0 {
            continue;
        }
        states += 1;
        let q = rng.gen_range(1e5..1e6);
        let jac = a.jacobian_unconstrained(&u, &old, q, &w).expect("jacobian");
        for _ in 0..5 {
            let d = random_state(&mut rng, [0.3, 2e-3, 50.0]);
            let jd = jac.matvec(&d);
            let h = 1e-5;
            let shifted = |s: f64| -> Vec<f64> { u.iter().zip(&d).map(|(x, y)| x + s * y).collect() };
            let rp = a.residual_unconstrained(&shifted(h), &old, q, &w).expect("residual");
            let rm = a.residual_unconstrained(&shifted(-h), &old, q, &w).expect("residual");
            let diff: Vec<f64> = (0..n).map(|i| (rp[i] - rm[i]) / (2.0 * h) - jd[i]).collect();
            worst = worst.max(norm(&diff) / norm(&jd));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-5 && secs <= 60.0,
        format!("5 states x 5 directions, worst relative error {worst:.3e} <= 1e-5 ({secs:.1} s)"),
    )
}

fn fsi1_config_fixed(steps: usize) -> ProblemConfig {
    let mut c = fsi1_config();
    c.scheme.steps = steps;
    c.functional = fsiopt::problems::FunctionalSpec::TipTracking {
        point: fsiopt::mesh::BENCHMARK_TIP,
        target: fsiopt::problems::Target::Fixed(0.0),
    };
    c
}

fn criterion6(c2: &Optimization, c3: &Optimization) -> Outcome {
    let start = Instant::now();
    let mut c = flapping_config();
    c.scheme.steps = 200;
    let p = c.build().expect("build");
    let flap = p.forward(c.q0);
    let (flap_ok, flap_j) = match &flap {
        Ok(run) => (run.min_jacobian > 0.0, format!("{:.4}", run.min_jacobian)),
        Err(e) => (false, format!("failed: {e}")),
    };
    outcome(
        c2.stats.min_jacobian > 0.0 && c3.stats.min_jacobian > 0.0 && flap_ok,
        format!(
            "min J: criterion 2 runs {:.4}, criterion 3 runs {:.4}, 200-step flapping run {flap_j} ({:.1} s)",
            c2.stats.min_jacobian,
            c3.stats.min_jacobian,
            start.elapsed().as_secs_f64()
        ),
    )
}

fn criterion7() -> Outcome {
    let start = Instant::now();
    let base = beam_config();
    let tip = |kind: SchemeKind, k: f64, steps: usize| -> f64 {
        let mut c = base.clone();
        c.scheme = ThetaScheme::new(kind, k, steps);
        let p: Problem = c.build().expect("build");
        let run = p.forward(c.q0).expect("beam run");
        let loc = fsiopt::fem::PointLocation::find(&p.mesh, c.output.point, None).expect("tip");
        let row = loc.row(&p.dofmap, fsiopt::fem::Field::Displacement, 1);
        fsiopt::fem::apply_row(&row, &run.trajectory.last().expect("state"))
    };
    let (k, n) = (base.scheme.k, base.scheme.steps);
    let mut pass = true;
    let mut parts = Vec::new();
    for (kind, name, range) in [
        (SchemeKind::BackwardEuler, "BE", 1.7..=2.3),
        (SchemeKind::ShiftedCrankNicolson, "shifted CN", 3.3..=4.7),
    ] {
        let reference = tip(kind, k / 16.0, 16 * n);
        let e: Vec<f64> = [1, 2, 4]
            .iter()
            .map(|&m| (tip(kind, k / m as f64, m * n) - reference).abs())
            .collect();
        let ratios = [e[0] / e[1], e[1] / e[2]];
        pass &= ratios.iter().all(|r| range.contains(r));
        parts.push(format!("{name} ratios {:.3}, {:.3}", ratios[0], ratios[1]));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        pass && secs <= 600.0,
        format!("k = {k}, {n} steps, k/16 reference: {} ({secs:.1} s)", parts.join("; ")),
    )
}

fn criterion8(c2: &Optimization, c3: &Optimization) -> Outcome {
    let steps = |o: &Optimization| o.log.records.iter().filter(|r| r.step.is_some()).count();
    outcome(
        c2.log.armijo_holds() && c3.log.armijo_holds(),
        format!(
            "Armijo inequality holds as logged for {} + {} accepted steps",
            steps(c2),
            steps(c3)
        ),
    )
}

fn flapping_trend() -> Outcome {
    let start = Instant::now();
    let mut c = flapping_config();
    c.scheme.steps = 100;
    c.optimizer.max_iterations = 10;
    let p = c.build().expect("build");
    let mut f = p.reduced();
    let result = gradient_method(&mut f, &[c.q0], &c.optimizer);
    let secs = start.elapsed().as_secs_f64();
    match result {
        Ok((q, log)) => {
            let dist: Vec<f64> = log.records.iter().map(|r| (r.q[0] - c.q_d).abs()).collect();
            let monotone = dist.windows(2).all(|w| w[1] <= w[0]);
            let qs: Vec<String> = log.records.iter().map(|r| format!("{:.4e}", r.q[0])).collect();
            outcome(
                monotone && log.converged && log.records.len() <= 11,
                format!(
                    "q: [{}], final {:.6e}, converged {} ({secs:.1} s)",
                    qs.join(", "),
                    q[0],
                    log.converged
                ),
            )
        }
        Err(e) => outcome(false, format!("optimization failed: {e} ({secs:.1} s)")),
    }
}

fn main() {
    // `cargo test -- --list` and filters other than ours skip the run
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    if let Some(filter) = args.iter().find(|a| !a.starts_with('-')) {
        if !"acceptance".contains(filter.as_str()) {
            return;
        }
    }

    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("1 adjoint gradient", criterion1()));

    let c2_config = fsi1_config();
    let c2 = optimize(&c2_config);
    results.push(("2 FSI-1 alpha=1 iterates", criterion2(&c2)));

    let mut c3_config = fsi1_config();
    c3_config.alpha = 0.1;
    c3_config.q_d = 1e6;
    c3_config.optimizer.max_iterations = 5;
    c3_config.optimizer.tol_abs = 0.0;
    c3_config.optimizer.tol_rel = 0.0;
    let c3 = optimize(&c3_config);
    results.push(("3 FSI-1 alpha=0.1 trend", criterion3(&c3)));

    results.push((
        "4 Newton performance",
        criterion4(&c2, c2_config.newton.tol, c2_config.newton.abs_floor),
    ));
    results.push(("5 Jacobian exactness", criterion5()));
    results.push(("6 mesh validity", criterion6(&c2, &c3)));
    results.push(("7 time-integrator order", criterion7()));
    results.push(("8 Armijo contract", criterion8(&c2, &c3)));
    results.push(("flapping trend", flapping_trend()));

    let mut failed = 0;
    for (name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {name}: {tag}: {}", o.detail);
        failed += (!o.pass) as usize;
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
