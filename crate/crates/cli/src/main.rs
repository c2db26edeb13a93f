use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use node_opener::io::{Problem, SolutionFile, SpecFile};
use node_opener::norms::check_norm_admissibility;
use node_opener::solver::{solve, solve_linear_oracle, SolveConfig, ORACLE_MAX_UNKNOWNS};
use node_opener::verify::{fit_decay, run_checks, sample_form, CheckConfig};
use node_opener::Complex64;
use serde_json::json;

#[derive(Parser)]
#[command(name = "node-opener", version, about = "Differentials with prescribed periods on surfaces with opened nodes")]
struct Cli {
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, env = "NODE_OPENER_THREADS", default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check chart admissibility and norm weights of a spec.
    Validate {
        spec: PathBuf,
        /// Boundary samples per chart.
        #[arg(long, default_value_t = 256)]
        samples: usize,
        /// Degree bound for the norm check; the graph's maximum degree by default.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Solve for the differential and write a solution file.
    Solve {
        spec: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Cross-check against a dense linear solve.
        #[arg(long)]
        oracle: bool,
        /// Output path; stdout when absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run verification checks on a solution.
    Check {
        spec: PathBuf,
        solution: PathBuf,
        /// Comma-separated subset of checks.
        #[arg(long, value_delimiter = ',')]
        checks: Vec<String>,
        /// Root vertex for the decay check.
        #[arg(long)]
        root: Option<String>,
        /// Required decay ratio per graph step.
        #[arg(long, default_value_t = 2.0)]
        rate: f64,
        /// Finite-difference step for the derivative check.
        #[arg(long)]
        h: Option<f64>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Sample ω/dz on one sphere as CSV.
    Eval {
        spec: PathBuf,
        solution: PathBuf,
        #[arg(long)]
        vertex: String,
        /// `x0:x1:nx,y0:y1:ny`.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "points", required_unless_present = "points")]
        grid: Option<String>,
        /// CSV file whose first two columns are `re_z,im_z`, with a header.
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Sampled sup of |ω/dz| per vertex against distance from a root, as CSV.
    Decay {
        spec: PathBuf,
        solution: PathBuf,
        #[arg(long)]
        root: String,
        #[arg(long, default_value_t = 32)]
        per_circle: usize,
    },
}

#[derive(Args)]
struct SolverArgs {
    /// Truncation order N.
    #[arg(long, default_value_t = 12)]
    order: usize,
    /// Quadrature points per circle (power of two, at least 64).
    #[arg(long, default_value_t = 256)]
    quad: usize,
    #[arg(long, default_value_t = 1e-13)]
    tol: f64,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
}

impl SolverArgs {
    fn config(&self, problem: &Problem) -> SolveConfig {
        SolveConfig {
            order: self.order,
            quad_points: self.quad,
            tol: self.tol,
            max_iter: self.max_iter,
            weights: problem.weights.clone(),
            ..SolveConfig::default()
        }
    }
}

fn load_problem(path: &Path) -> Result<Problem> {
    let spec = SpecFile::load(path)?;
    spec.build().with_context(|| format!("invalid spec {}", path.display()))
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn validate(spec: &Path, samples: usize, k: Option<usize>) -> Result<bool> {
    let problem = load_problem(spec)?;
    let g = problem.surface.graph();
    let surface = problem.surface.validate_admissibility(samples);
    let mut ok = surface.passed();
    let norms = match &problem.weights {
        Some(w) => {
            let report = check_norm_admissibility(g, w, k.unwrap_or(g.max_degree()), 100, 0);
            ok &= report.admissible() && report.bounds_hold();
            Some(report)
        }
        None => None,
    };
    let compatible = node_opener::solver::check_compatibility(
        &problem.surface,
        &problem.alpha.to_dense(g)?,
        &problem.parts,
    );
    let mut failures = surface.failures();
    if let Err(e) = &compatible {
        failures.push(e.to_string());
        ok = false;
    }
    if let Some(n) = &norms {
        if !n.admissible() {
            failures.push(format!(
                "weights are not admissible for k = {}: max degree {}, max adjacent weight ratio {}",
                n.k, n.max_degree, n.max_adjacent_ratio
            ));
        }
    }
    print_json(&json!({
        "passed": ok,
        "failures": failures,
        "surface": surface,
        "norms": norms,
    }))?;
    Ok(ok)
}

fn run_solve(spec: &Path, args: &SolverArgs, oracle: bool, out: Option<&Path>) -> Result<()> {
    let problem = load_problem(spec)?;
    let cfg = args.config(&problem);
    let (d, mut report) = solve(&problem.surface, &problem.alpha, &problem.parts, &cfg)?;
    if oracle {
        if d.lambda().len() > ORACLE_MAX_UNKNOWNS {
            bail!(
                "oracle limited to {ORACLE_MAX_UNKNOWNS} unknowns, this problem has {}",
                d.lambda().len()
            );
        }
        let exact = solve_linear_oracle(&problem.surface, &problem.alpha, &problem.parts, &cfg)?;
        report.oracle_max_diff = Some(exact.lambda.max_abs_diff(d.lambda()));
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    eprintln!(
        "converged in {} iterations, final update {:e}, contraction factor {:e}, max period residual {:e}",
        report.iterations, report.final_update, report.contraction_factor, report.max_period_residual
    );
    if let Some(diff) = report.oracle_max_diff {
        eprintln!("max |λ - λ_oracle| = {diff:e}");
    }
    let solution = SolutionFile::from_differential(&d, report);
    match out {
        Some(path) => solution.save(path)?,
        None => println!("{}", solution.to_json()),
    }
    Ok(())
}

fn run_check(
    spec: &Path,
    solution: &Path,
    checks: &[String],
    root: Option<&str>,
    rate: f64,
    h: Option<f64>,
    args: &SolverArgs,
) -> Result<bool> {
    let problem = load_problem(spec)?;
    let d = SolutionFile::load(solution)?.differential(&problem)?;
    let g = problem.surface.graph();
    let cfg = CheckConfig {
        root: root.map(|r| g.vertex(r)).transpose()?,
        rate,
        h,
        solve: args.config(&problem),
        ..CheckConfig::default()
    };
    let report = run_checks(&d, checks, &cfg)?;
    print_json(&report)?;
    Ok(report.passed())
}

/// Parses `x0:x1:nx,y0:y1:ny`.
fn parse_grid(text: &str) -> Result<Vec<Complex64>> {
    let axis = |part: &str| -> Result<Vec<f64>> {
        let fields: Vec<&str> = part.split(':').collect();
        if fields.len() != 3 {
            bail!("grid axis `{part}` must look like start:end:count");
        }
        let (a, b): (f64, f64) = (fields[0].trim().parse()?, fields[1].trim().parse()?);
        let n: usize = fields[2].trim().parse()?;
        if n == 0 || !a.is_finite() || !b.is_finite() {
            bail!("grid axis `{part}` needs finite bounds and a positive count");
        }
        Ok(if n == 1 {
            vec![a]
        } else {
            (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
        })
    };
    let Some((xs, ys)) = text.split_once(',') else {
        bail!("grid must look like x0:x1:nx,y0:y1:ny");
    };
    let (xs, ys) = (axis(xs)?, axis(ys)?);
    Ok(ys
        .iter()
        .flat_map(|&y| xs.iter().map(move |&x| Complex64::new(x, y)))
        .collect())
}

fn read_points(path: &Path) -> Result<Vec<Complex64>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut points = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let field = |i: usize| -> Result<f64> {
            Ok(record
                .get(i)
                .with_context(|| format!("row {} has fewer than two columns", line + 1))?
                .trim()
                .parse()?)
        };
        points.push(Complex64::new(field(0)?, field(1)?));
    }
    Ok(points)
}

fn run_eval(spec: &Path, solution: &Path, vertex: &str, grid: Option<&str>, points: Option<&Path>) -> Result<()> {
    let problem = load_problem(spec)?;
    let d = SolutionFile::load(solution)?.differential(&problem)?;
    let v = problem.surface.graph().vertex(vertex)?;
    let zs = match (grid, points) {
        (Some(g), _) => parse_grid(g)?,
        (None, Some(p)) => read_points(p)?,
        (None, None) => bail!("either --grid or --points is required"),
    };
    let values = sample_form(&d, v, &zs);
    let mut out = csv::Writer::from_writer(std::io::stdout().lock());
    out.write_record(["re_z", "im_z", "re_w", "im_w", "status"])?;
    for (z, w) in zs.iter().zip(values) {
        let (re, im) = (z.re.to_string(), z.im.to_string());
        match w {
            Some(w) => out.write_record([re, im, w.re.to_string(), w.im.to_string(), "ok".into()])?,
            None => out.write_record([re, im, String::new(), String::new(), "singular".into()])?,
        }
    }
    out.flush()?;
    Ok(())
}

fn run_decay(spec: &Path, solution: &Path, root: &str, per_circle: usize) -> Result<()> {
    let problem = load_problem(spec)?;
    let d = SolutionFile::load(solution)?.differential(&problem)?;
    let g = problem.surface.graph();
    let r = g.vertex(root)?;
    let cfg = CheckConfig {
        per_circle,
        ..CheckConfig::default()
    };
    let profile = node_opener::verify::decay_profile(&d, r, &cfg)?;
    let mut rows: Vec<_> = profile.iter().map(|&(v, k, sup)| (k, g.vertex_id(v), sup)).collect();
    rows.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut out = csv::Writer::from_writer(std::io::stdout().lock());
    out.write_record(["vertex", "distance", "sup"])?;
    for (k, name, sup) in rows {
        out.write_record([name.to_string(), k.to_string(), sup.to_string()])?;
    }
    out.flush()?;
    let fit = fit_decay(&d, r, &cfg)?;
    if fit.vanishes {
        eprintln!("ω vanishes beyond distance {}", fit.support_distance);
    } else if let Some(slope) = fit.slope {
        eprintln!(
            "slope {slope:.6} (ratio {:.6e} per step) from distance {}",
            (-slope).exp(),
            fit.support_distance
        );
    } else {
        eprintln!("not enough nonzero distances beyond {} for a fit", fit.support_distance);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .context("cannot configure the thread pool")?;
    }
    match cli.command {
        Command::Validate { spec, samples, k } => validate(&spec, samples, k),
        Command::Solve {
            spec,
            solver,
            oracle,
            out,
        } => run_solve(&spec, &solver, oracle, out.as_deref()).map(|_| true),
        Command::Check {
            spec,
            solution,
            checks,
            root,
            rate,
            h,
            solver,
        } => run_check(&spec, &solution, &checks, root.as_deref(), rate, h, &solver),
        Command::Eval {
            spec,
            solution,
            vertex,
            grid,
            points,
        } => run_eval(&spec, &solution, &vertex, grid.as_deref(), points.as_deref()).map(|_| true),
        Command::Decay {
            spec,
            solution,
            root,
            per_circle,
        } => run_decay(&spec, &solution, &root, per_circle).map(|_| true),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err
                .chain()
                .find_map(|e| e.downcast_ref::<node_opener::Error>())
                .map(|e| e.exit_code())
                .unwrap_or(2);
            ExitCode::from(code as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_row_major_in_y() {
        let pts = parse_grid("0:1:2,-1:1:3").unwrap();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0], Complex64::new(0.0, -1.0));
        assert_eq!(pts[1], Complex64::new(1.0, -1.0));
        assert_eq!(pts[5], Complex64::new(1.0, 1.0));
        assert!(parse_grid("0:1,0:1:2").is_err());
        assert!(parse_grid("0:1:0,0:1:2").is_err());
    }
}
