//! `fsiopt`: forward runs, gradient checks and μ estimation from the
//! command line.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use fsiopt::optimize::{gradient_check, gradient_method, min_error};
use fsiopt::output::{write_vtk, POINT_CSV_HEADER};
use fsiopt::problems::{Problem, ProblemConfig};
use fsiopt::timestepper::run_forward_with;
use fsiopt::Error;

#[derive(Parser)]
#[command(name = "fsiopt", version, about = "Monolithic ALE FSI with adjoint-based estimation of the solid shear modulus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the forward problem at `control.q0`.
    Forward {
        #[command(flatten)]
        common: Common,
        /// Write a VTK snapshot every N steps (overrides output.vtk_every).
        #[arg(long, value_name = "N")]
        vtk_every: Option<usize>,
    },
    /// Compare the adjoint gradient at `control.q0` with central differences.
    GradCheck {
        #[command(flatten)]
        common: Common,
        /// Relative step sizes s; each check uses h = s·|q|.
        #[arg(long, value_name = "S1,S2,...", value_delimiter = ',', default_values_t = [1e-4, 1e-3, 1e-2, 1e-1])]
        fd_steps: Vec<f64>,
        /// Largest acceptable relative error for the best step.
        #[arg(long, default_value_t = 1e-3)]
        threshold: f64,
    },
    /// Run the Armijo gradient method from `control.q0`.
    Optimize {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Config file; without it the `fsi1` preset is used.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set time.steps=3`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    output: PathBuf,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

const SOLVER_FAILURE: u8 = 2;
const VERIFICATION_FAILURE: u8 = 3;
const CONFIG_ERROR: u8 = 4;

fn classify(e: Error) -> Failure {
    let code = match e.root() {
        Error::Config(_) | Error::UnknownMarker(_) | Error::MeshFormat { .. } | Error::PointOutside { .. } => {
            CONFIG_ERROR
        }
        _ => SOLVER_FAILURE,
    };
    Failure {
        code,
        error: e.into(),
    }
}

fn io(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: SOLVER_FAILURE,
        error: e.into(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Forward { common, vtk_every } => {
            let (mut config, dir) = setup(&common)?;
            if let Some(n) = vtk_every {
                config.output.vtk_every = n;
            }
            forward(&build(&config)?, &dir)
        }
        Command::GradCheck {
            common,
            fd_steps,
            threshold,
        } => {
            let (config, dir) = setup(&common)?;
            if fd_steps.iter().any(|s| !(*s > 0.0)) {
                return Err(Failure {
                    code: CONFIG_ERROR,
                    error: anyhow::anyhow!("--fd-steps must be positive"),
                });
            }
            grad_check(&build(&config)?, &dir, &fd_steps, threshold)
        }
        Command::Optimize { common } => {
            let (config, dir) = setup(&common)?;
            optimize(&build(&config)?, &dir)
        }
    }
}

fn setup(common: &Common) -> Result<(ProblemConfig, PathBuf), Failure> {
    let config = fsiopt::config::load_file(common.config.as_deref(), &common.overrides).map_err(classify)?;
    config.validate().map_err(classify)?;
    fs::create_dir_all(&common.output)
        .with_context(|| format!("creating {}", common.output.display()))
        .map_err(io)?;
    fs::write(common.output.join("config.cfg"), fsiopt::config::to_text(&config)).map_err(io)?;
    Ok((config, common.output.clone()))
}

fn build(config: &ProblemConfig) -> Result<Problem, Failure> {
    let p = config.build().map_err(classify)?;
    log::info!(
        "{}: {} cells, {} dofs, {} steps of k = {}",
        config.name,
        p.mesh.num_cells(),
        p.dofmap.len(),
        config.scheme.steps,
        config.scheme.k
    );
    Ok(p)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .with_context(|| format!("creating {}", path.display()))
        .map(BufWriter::new)
        .map_err(io)
}

fn forward(p: &Problem, dir: &Path) -> Result<(), Failure> {
    let probe = p.probe().map_err(classify)?;
    let mut csv = create(&dir.join("points.csv"))?;
    writeln!(csv, "{POINT_CSV_HEADER}").map_err(io)?;
    let every = p.config.output.vtk_every;
    let result = run_forward_with(&p.model(), p.config.q0, &p.initial, |n, t, state| {
        writeln!(csv, "{}", probe.sample(t, state)?.csv_row())?;
        if every > 0 && n % every == 0 {
            let mut w = BufWriter::new(File::create(dir.join(format!("state_{n:05}.vtk")))?);
            write_vtk(&mut w, &p.mesh, &p.dofmap, state, &format!("{} t = {t}", p.config.name))?;
            w.flush()?;
        }
        Ok(())
    });
    csv.flush().map_err(io)?;
    let run = result.map_err(classify)?;
    let mut log = create(&dir.join("run.log"))?;
    writeln!(log, "step,t,newton_iterations,jacobian_builds,initial_residual,final_residual").map_err(io)?;
    for (i, r) in run.reports.iter().enumerate() {
        writeln!(
            log,
            "{},{:e},{},{},{:e},{:e}",
            i + 1,
            p.config.scheme.time(i + 1),
            r.iterations,
            r.jacobian_builds,
            r.initial_residual,
            r.final_residual
        )
        .map_err(io)?;
    }
    log.flush().map_err(io)?;
    let last = run.trajectory.last().map_err(classify)?;
    let s = probe.sample(p.config.scheme.end_time(), &last).map_err(classify)?;
    println!(
        "end time {}: u_A = ({:.6e}, {:.6e}), drag {:.6e}, min J {:.4}",
        s.t, s.u1, s.u2, s.drag, run.min_jacobian
    );
    Ok(())
}

fn grad_check(p: &Problem, dir: &Path, steps: &[f64], threshold: f64) -> Result<(), Failure> {
    let mut f = p.reduced();
    let q = [p.config.q0];
    let rows = gradient_check(&mut f, &q, steps).map_err(classify)?;
    let mut csv = create(&dir.join("gradient_check.csv"))?;
    writeln!(csv, "h,fd_value,adjoint_value,rel_error").map_err(io)?;
    for r in &rows {
        writeln!(csv, "{:e},{:.12e},{:.12e},{:e}", r.h, r.fd, r.adjoint, r.rel_error).map_err(io)?;
        println!("h = {:.3e}: fd {:.9e} adjoint {:.9e} rel error {:.3e}", r.h, r.fd, r.adjoint, r.rel_error);
    }
    csv.flush().map_err(io)?;
    let best = min_error(&rows);
    if best <= threshold {
        println!("gradient check passed: min rel error {best:.3e} <= {threshold:e}");
        Ok(())
    } else {
        Err(Failure {
            code: VERIFICATION_FAILURE,
            error: anyhow::anyhow!("gradient check failed: min rel error {best:.3e} > {threshold:e}"),
        })
    }
}

fn optimize(p: &Problem, dir: &Path) -> Result<(), Failure> {
    let mut f = p.reduced();
    let (q, log) = gradient_method(&mut f, &[p.config.q0], &p.config.optimizer).map_err(classify)?;
    fs::write(dir.join("optimization.csv"), log.to_csv()).map_err(io)?;
    let q_text: Vec<String> = q.iter().map(|v| format!("{v:.12e}")).collect();
    fs::write(dir.join("q_final.txt"), q_text.join("\n") + "\n").map_err(io)?;
    for r in &log.records {
        println!(
            "k = {:2}  J = {:.6e}  q = {:.6e}  |grad|/|grad0| = {:.3e}",
            r.k, r.value, r.q[0], r.normalized
        );
    }
    if log.converged {
        println!("converged: q = {}", q_text.join(", "));
        Ok(())
    } else {
        Err(Failure {
            code: SOLVER_FAILURE,
            error: anyhow::anyhow!(
                "no convergence within {} iterations (q = {})",
                p.config.optimizer.max_iterations,
                q_text.join(", ")
            ),
        })
    }
}
