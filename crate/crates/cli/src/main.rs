use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use volterra::domain::check_lambda_invariance;
use volterra::weights::{a_sequence, boundary_modulus, g0_norms};
use volterra::{
    build_schedule, check_brzeg, check_hypotheses, goursat_spec, parse_config, picard_solve,
    write_solution_csv, Config, Error, Expr, GridFunction, ProblemSpec, SolveReport, Strategy,
    WeightSchedule,
};

const SECOND_KIND: &str = include_str!("../../core/examples/second_kind.cfg");
const BANAS_MOD: &str = include_str!("../../core/examples/banas_mod.cfg");
const GOURSAT: &str = include_str!("../../core/examples/goursat.cfg");

const GOLDEN_SECOND_KIND: f64 = 5e-4;
const GOLDEN_GOURSAT: f64 = 1e-3;
const MIXED_DIFF_TOL: f64 = 5e-2;

#[derive(Parser)]
#[command(name = "volterra", version, about = "Weighted Picard solver for Volterra integral equations and inclusions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sampled hypothesis checks; exit 2 when any fails.
    Check {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        opts: SolveOpts,
        /// Random samples per check.
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Weight schedule as CSV.
    Weights {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        opts: SolveOpts,
    },
    /// Picard iteration; solution as CSV, summary on stderr.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Use a schedule written by `weights` instead of building one.
        #[arg(long)]
        schedule: Option<PathBuf>,
        #[command(flatten)]
        opts: SolveOpts,
    },
    /// Built-in worked examples, compared with the closed form where one exists.
    Example {
        name: ExampleName,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the example's config file and exit.
        #[arg(long)]
        show_config: bool,
        /// Right-hand side of the mixed-derivative equation (goursat only).
        #[arg(long)]
        f: Option<String>,
        /// Zero traces and corner value (goursat only).
        #[arg(long)]
        zero_boundary: bool,
        #[command(flatten)]
        opts: SolveOpts,
    },
    /// Evaluates an expression, e.g. `expr-eval "x^2" --var x=3`.
    ExprEval {
        expr: String,
        #[arg(long = "var", value_parser = parse_binding)]
        vars: Vec<(String, f64)>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExampleName {
    BanasMod,
    SecondKind,
    Goursat,
}

#[derive(Args, Clone, Default)]
struct SolveOpts {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    strategy: Option<Strategy>,
}

impl SolveOpts {
    fn apply(&self, spec: &mut ProblemSpec) -> Result<(), Error> {
        if let Some(n) = self.n {
            if n == 0 {
                return Err(Error::InvalidProblem("--n must be at least 1".into()));
            }
            spec.disc.n = n;
        }
        if let Some(h) = self.h {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidProblem("--h must be positive".into()));
            }
            spec.disc.h = h;
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return Err(Error::InvalidProblem("--tol must be positive".into()));
            }
            spec.disc.tol_fix = t;
        }
        if let Some(m) = self.max_iter {
            if m == 0 {
                return Err(Error::InvalidProblem("--max-iter must be at least 1".into()));
            }
            spec.disc.max_iter = m;
        }
        if let Some(s) = self.strategy {
            spec.disc.strategy = s;
        }
        Ok(())
    }
}

fn parse_binding(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected NAME=VALUE")?;
    let v: f64 = v.trim().parse().map_err(|_| format!("`{v}` is not a number"))?;
    Ok((k.trim().to_string(), v))
}

enum Failure {
    Op(Error),
    Verify(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Op(e)
    }
}

impl From<volterra::ExprError> for Failure {
    fn from(e: volterra::ExprError) -> Self {
        Failure::Op(Error::Expr(e))
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Op(Error::Io(e))
    }
}

type Outcome = Result<(), Failure>;

fn load(path: &Path, opts: &SolveOpts) -> Result<Config, Error> {
    let text = std::fs::read_to_string(path)?;
    let mut cfg = parse_config(&text)?;
    opts.apply(&mut cfg.spec)?;
    Ok(cfg)
}

fn sink(out: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn schedule_for(spec: &ProblemSpec) -> Result<WeightSchedule, Error> {
    let n = spec.disc.n;
    let a = a_sequence(spec, n)?;
    build_schedule(spec, &a, n)
}

fn summarize(spec: &ProblemSpec, rep: &SolveReport) {
    let row = &rep.schedule;
    eprintln!("form {}, n = {}, h = {}", spec.form, spec.disc.n, spec.disc.h);
    eprintln!("L_n = {}, a_n = {}, k_n = {}", row.l, row.a, row.k);
    eprintln!(
        "iterations = {}, converged = {}, residual = {:e}, ratio = {:.6}",
        rep.iterations,
        rep.converged,
        rep.residual,
        rep.ratio
    );
    if !spec.f.is_singleton() || spec.form == volterra::Form::SetValued {
        eprintln!("output: a solution of the selected equation, hence of the inclusion");
    }
}

fn solve_and_write(spec: &ProblemSpec, sched: &WeightSchedule, out: &Option<PathBuf>) -> Result<SolveReport, Failure> {
    let rep = picard_solve(spec, sched)?;
    let mut w = sink(out)?;
    write_solution_csv(&rep.solution, &mut w)?;
    w.flush()?;
    summarize(spec, &rep);
    Ok(rep)
}

fn converged(rep: &SolveReport) -> Outcome {
    if rep.converged {
        Ok(())
    } else {
        Err(Failure::Verify(format!(
            "no convergence within {} iterations",
            rep.iterations
        )))
    }
}

fn cmd_check(path: &Path, opts: &SolveOpts, samples: usize, seed: u64) -> Outcome {
    let spec = load(path, opts)?.spec;
    let n = spec.disc.n;
    let mut ok = true;
    let rep = check_hypotheses(&spec, n, samples, seed)?;
    for (name, count) in &rep.checks {
        let bad = rep.violations_of(name);
        println!("{:<20} {:>6} samples  {}", name, count, if bad == 0 { "ok" } else { "FAIL" });
    }
    for v in rep.violations.iter().take(10) {
        println!("  {} at {:?}: {}", v.check, v.point, v.detail);
    }
    ok &= rep.pass();
    for k in 1..=n {
        let inv = check_lambda_invariance(&spec.exhaustion, &spec.region, k, 17)?;
        println!(
            "{:<20} n = {k}  {}",
            "lambda-invariance",
            if inv.pass { "ok".to_string() } else { format!("FAIL at {:?}", inv.worst_point) }
        );
        ok &= inv.pass;
    }
    let a = a_sequence(&spec, n)?;
    let brzeg = check_brzeg(&g0_norms(&spec, n)?, &boundary_modulus(&spec), &a, n)?;
    println!(
        "{:<20} window {:?}, min {:.6e}  {}",
        "boundary",
        brzeg.window,
        brzeg.window_min,
        if brzeg.pass { "ok" } else { "FAIL" }
    );
    ok &= brzeg.pass;
    if ok {
        Ok(())
    } else {
        Err(Failure::Verify("hypothesis checks failed".into()))
    }
}

fn cmd_weights(path: &Path, out: &Option<PathBuf>, opts: &SolveOpts) -> Outcome {
    let spec = load(path, opts)?.spec;
    let sched = schedule_for(&spec)?;
    let mut w = sink(out)?;
    sched.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_solve(path: &Path, out: &Option<PathBuf>, schedule: &Option<PathBuf>, opts: &SolveOpts) -> Outcome {
    let spec = load(path, opts)?.spec;
    let sched = match schedule {
        Some(p) => WeightSchedule::read_csv(File::open(p)?)?,
        None => schedule_for(&spec)?,
    };
    let rep = solve_and_write(&spec, &sched, out)?;
    converged(&rep)
}

/// Largest `|u - exact| / scale` over the grid.
fn max_error(u: &GridFunction<f64>, exact: impl Fn(&[f64]) -> f64, relative: bool) -> f64 {
    let g = u.grid();
    (0..g.len())
        .map(|i| {
            let x = g.node(i);
            let e = exact(&x);
            let d = (u.at(i)[0] - e).abs();
            if relative {
                d / e.abs().max(f64::MIN_POSITIVE)
            } else {
                d
            }
        })
        .fold(0.0, f64::max)
}

/// Worst gap between the second mixed difference quotient and `f` over interior cells.
fn mixed_difference_gap(u: &GridFunction<f64>, f: &Expr) -> Result<f64, Error> {
    let g = u.grid();
    let (xs, ys) = (g.coords(0), g.coords(1));
    let mut worst = 0.0f64;
    for i in 1..xs.len() {
        for j in 1..ys.len() {
            let v = |a: usize, b: usize| u.at(g.flat_index(&[a, b]))[0];
            let d = (v(i, j) - v(i - 1, j) - v(i, j - 1) + v(i - 1, j - 1))
                / ((xs[i] - xs[i - 1]) * (ys[j] - ys[j - 1]));
            let mid = [0.5 * (xs[i] + xs[i - 1]), 0.5 * (ys[j] + ys[j - 1])];
            let um = 0.25 * (v(i, j) + v(i - 1, j) + v(i, j - 1) + v(i - 1, j - 1));
            let fv = f.eval(&[("x1", mid[0]), ("x2", mid[1]), ("u", um), ("u1", um)])?;
            worst = worst.max((d - fv).abs());
        }
    }
    Ok(worst)
}

fn cmd_example(
    name: ExampleName,
    out: &Option<PathBuf>,
    show: bool,
    f: &Option<String>,
    zero_boundary: bool,
    opts: &SolveOpts,
) -> Outcome {
    let text = match name {
        ExampleName::SecondKind => SECOND_KIND,
        ExampleName::BanasMod => BANAS_MOD,
        ExampleName::Goursat => GOURSAT,
    };
    if show {
        print!("{text}");
        return Ok(());
    }
    if !matches!(name, ExampleName::Goursat) && (f.is_some() || zero_boundary) {
        return Err(Failure::Op(Error::InvalidProblem(
            "--f and --zero-boundary apply to the goursat example only".into(),
        )));
    }
    let mut cfg = parse_config(text)?;
    if let Some(data) = cfg.goursat.as_mut() {
        if let Some(f) = f {
            data.f = Expr::parse(f)?;
        }
        if zero_boundary {
            data.traces.clear();
            data.u0 = 0.0;
        }
        cfg.spec = goursat_spec(data, cfg.spec.disc.clone())?;
    }
    let mut spec = cfg.spec;
    opts.apply(&mut spec)?;
    let sched = schedule_for(&spec)?;
    let rep = solve_and_write(&spec, &sched, out)?;
    converged(&rep)?;
    match name {
        ExampleName::SecondKind => {
            let err = max_error(&rep.solution, |x| x[0].exp(), true);
            eprintln!("max relative error against exp(x): {err:.3e} (limit {GOLDEN_SECOND_KIND:e})");
            if err > GOLDEN_SECOND_KIND {
                return Err(Failure::Verify("golden comparison failed".into()));
            }
        }
        ExampleName::Goursat => {
            let data = cfg.goursat.expect("goursat config");
            let zero = data.u0 == 0.0 && data.traces.values().all(|e| e.is_constant() && e.eval(&[("x", 0.0)]).ok() == Some(0.0));
            if spec.dim() == 2 {
                let gap = mixed_difference_gap(&rep.solution, &data.f)?;
                eprintln!("max |mixed difference - f|: {gap:.3e} (limit {MIXED_DIFF_TOL:e})");
                if gap > MIXED_DIFF_TOL {
                    return Err(Failure::Verify("mixed-difference check failed".into()));
                }
                if let (true, Some(c)) = (zero, data.f.is_constant().then(|| data.f.eval(&[("x", 0.0)]).ok()).flatten()) {
                    let err = max_error(&rep.solution, |x| c * x[0] * x[1], false);
                    eprintln!("max error against {c} x1 x2: {err:.3e} (limit {GOLDEN_GOURSAT:e})");
                    if err > GOLDEN_GOURSAT {
                        return Err(Failure::Verify("golden comparison failed".into()));
                    }
                }
            }
        }
        ExampleName::BanasMod => {
            let ratio_ok = rep.ratio < 1.0;
            eprintln!("no closed form; residual and contraction ratio reported above");
            if !ratio_ok {
                return Err(Failure::Verify("observed ratio not below 1".into()));
            }
        }
    }
    Ok(())
}

fn cmd_expr_eval(expr: &str, vars: &[(String, f64)]) -> Outcome {
    let e = Expr::parse(expr)?;
    let b: Vec<(&str, f64)> = vars.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    let v = e.eval(b.as_slice())?;
    println!("{v}");
    Ok(())
}

fn init_threads() {
    if let Some(n) = std::env::var("VOLTERRA_THREADS").ok().and_then(|s| s.trim().parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    let res = match &cli.cmd {
        Cmd::Check { config, opts, samples, seed } => cmd_check(config, opts, *samples, *seed),
        Cmd::Weights { config, out, opts } => cmd_weights(config, out, opts),
        Cmd::Solve { config, out, schedule, opts } => cmd_solve(config, out, schedule, opts),
        Cmd::Example { name, out, show_config, f, zero_boundary, opts } => {
            cmd_example(*name, out, *show_config, f, *zero_boundary, opts)
        }
        Cmd::ExprEval { expr, vars } => cmd_expr_eval(expr, vars),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Op(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Verify(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(2)
        }
    }
}
