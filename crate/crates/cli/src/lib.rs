//! The `levyot` command line.
//!
//! Exit codes: 0 on success, 1 for invalid input or a failed certificate,
//! 2 for internal numerical failures.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use levyot::gen_metric::{generator_distance, lambda_convergence_report, truncate_measure, CoupledTriplet};
use levyot::io::{self, Input};
use levyot::levy_ot::{check_cyclical_monotonicity, classical_ot_solve, extract_duals_with_gap, levy_ot_solve, CycleCheck};
use levyot::simulate::{estimate_cost_growth, estimate_sup_distance};
use levyot::{bures_wasserstein_sq, validate_coupling, DiscreteLevyMeasure, LevyTriplet, StrategyRegistry};
use serde_json::json;

#[derive(Parser)]
#[command(name = "levyot", version, about = "Optimal couplings of Lévy triplets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generator distance and its parts; two measures give W_Λ² only.
    Dist {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        common: Common,
    },
    /// Build a coupled triplet.
    Couple {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, default_value = "optimal")]
        strategy: String,
        #[command(flatten)]
        common: Common,
    },
    /// Check a coupling for marginals, duality gap and monotonicity.
    Certify {
        #[arg(long)]
        a: Option<PathBuf>,
        #[arg(long)]
        b: Option<PathBuf>,
        /// Coupled triplet written by `couple`.
        #[arg(long)]
        coupled: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo cost growth and maximal distance of a coupling started at (0, 0).
    Simulate {
        #[command(flatten)]
        pair: Pair,
        /// Times for E ½|X_t − Y_t|².
        #[arg(long = "t", value_delimiter = ',')]
        times: Vec<f64>,
        /// Horizons for E sup |X_t − Y_t|².
        #[arg(long = "T", value_delimiter = ',')]
        horizons: Vec<f64>,
        #[arg(long, default_value_t = 10_000)]
        paths: usize,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value = "optimal")]
        strategy: String,
        #[command(flatten)]
        common: Common,
    },
    /// W_Λ convergence diagnostics of a sequence against a target measure.
    Converge {
        /// Target measure.
        #[arg(long)]
        a: PathBuf,
        /// JSON array of measures; defaults to truncations of the target at 1/n.
        #[arg(long)]
        b: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Classical transport between equal-mass measures.
    Classical {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Pair {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "tol-gap", default_value_t = levyot::tol::GAP)]
    tol_gap: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

enum Failure {
    Input(String),
    Internal(String),
    /// The artifact was produced but a certificate did not pass.
    Rejected(String),
}

impl From<levyot::Error> for Failure {
    fn from(e: levyot::Error) -> Self {
        if e.is_internal() {
            Failure::Internal(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) | Failure::Internal(m) | Failure::Rejected(m) => f.write_str(m),
        }
    }
}

type Outcome<T> = Result<T, Failure>;

/// Runs the command line `args` (including the program name).
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    0
                }
                _ => 1,
            };
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(stderr, "levyot: {f}");
            match f {
                Failure::Input(_) | Failure::Rejected(_) => 1,
                Failure::Internal(_) => 2,
            }
        }
    }
}

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Outcome<Input> {
    io::parse_input(&read(path)?).map_err(|e| with_path(path, e))
}

fn with_path(path: &Path, e: levyot::Error) -> Failure {
    match Failure::from(e) {
        Failure::Input(m) => Failure::Input(format!("{}: {m}", path.display())),
        other => other,
    }
}

fn load_measure(path: &Path) -> Outcome<DiscreteLevyMeasure> {
    match load(path)? {
        Input::Measure(m) => Ok(m),
        Input::Triplet(t) => Ok(t.jumps().clone()),
    }
}

fn emit(common: &Common, text: &str, stdout: &mut dyn Write) -> Outcome<()> {
    match &common.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Internal(format!("{}: {e}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Internal(format!("stdout: {e}"))),
    }
}

fn json_only(common: &Common) -> Outcome<()> {
    if common.format == Some(Format::Csv) {
        return Err(Failure::Input("this command only writes JSON".into()));
    }
    Ok(())
}

fn check_tol(common: &Common) -> Outcome<()> {
    if common.tol_gap > 0.0 && common.tol_gap.is_finite() {
        Ok(())
    } else {
        Err(Failure::Input(format!("--tol-gap must be positive, got {}", common.tol_gap)))
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Outcome<()> {
    match command {
        Command::Dist { pair, common } => {
            let (a, b) = (load(&pair.a)?, load(&pair.b)?);
            let csv = common.format == Some(Format::Csv);
            let text = match (a, b) {
                (Input::Measure(mu), Input::Measure(nu)) => {
                    let w = levy_ot_solve(&mu, &nu)?.cost;
                    if csv {
                        format!("jump_sq\n{}\n", num(w))
                    } else {
                        io::to_json_string(&json!({ "jump_sq": w }))?
                    }
                }
                (a, b) => {
                    let g = generator_distance(&a.into_triplet(), &b.into_triplet())?;
                    if csv {
                        format!(
                            "total_sq,drift_sq,diffusion_sq,jump_sq\n{},{},{},{}\n",
                            num(g.total_sq),
                            num(g.drift_sq),
                            num(g.diffusion_sq),
                            num(g.jump_sq)
                        )
                    } else {
                        io::distance_to_json(&g)?
                    }
                }
            };
            emit(&common, &text, stdout)
        }
        Command::Couple { pair, strategy, common } => {
            json_only(&common)?;
            let (a, b) = (load(&pair.a)?.into_triplet(), load(&pair.b)?.into_triplet());
            let registry = StrategyRegistry::with_defaults();
            let j = registry.get(&strategy)?.couple(&a, &b)?;
            emit(&common, &io::coupled_to_json(&j)?, stdout)
        }
        Command::Certify { a, b, coupled, common } => {
            json_only(&common)?;
            check_tol(&common)?;
            let a = a.map(|p| load(&p)).transpose()?.map(Input::into_triplet);
            let b = b.map(|p| load(&p)).transpose()?.map(Input::into_triplet);
            let j = match (&coupled, &a, &b) {
                (Some(path), _, _) => io::parse_coupled(&read(path)?).map_err(|e| with_path(path, e))?,
                (None, Some(a), Some(b)) => levyot::build_optimal_coupling(a, b)?,
                _ => return Err(Failure::Input("certify needs --a and --b, or --coupled".into())),
            };
            if a.is_some() != b.is_some() {
                return Err(Failure::Input("--a and --b must be given together".into()));
            }
            let targets = a.zip(b);
            let (report, passed) = certify(&j, targets.as_ref(), common.tol_gap)?;
            emit(&common, &io::to_json_string(&report)?, stdout)?;
            if passed {
                Ok(())
            } else {
                Err(Failure::Rejected("certificate failed".into()))
            }
        }
        Command::Simulate {
            pair,
            times,
            horizons,
            paths,
            grid,
            strategy,
            common,
        } => {
            let (a, b) = (load(&pair.a)?.into_triplet(), load(&pair.b)?.into_triplet());
            if times.is_empty() && horizons.is_empty() {
                return Err(Failure::Input("simulate needs --t and/or --T".into()));
            }
            let registry = StrategyRegistry::with_defaults();
            let j = registry.get(&strategy)?.couple(&a, &b)?;
            let rows = simulate_rows(&a, &b, &j, &times, &horizons, paths, grid, common.seed)?;
            let text = if common.format == Some(Format::Json) {
                let arr: Vec<_> = rows
                    .iter()
                    .map(|r| json!({"t": r.t, "estimate": r.estimate, "std_error": r.std_error, "predicted": r.predicted, "bound": r.bound}))
                    .collect();
                io::to_json_string(&arr)?
            } else {
                let mut s = String::from("t,estimate,std_error,predicted,bound\n");
                for r in &rows {
                    let predicted = r.predicted.map(num).unwrap_or_default();
                    s.push_str(&format!(
                        "{},{},{},{},{}\n",
                        num(r.t),
                        num(r.estimate),
                        num(r.std_error),
                        predicted,
                        num(r.bound)
                    ));
                }
                s
            };
            emit(&common, &text, stdout)
        }
        Command::Converge { a, b, common } => {
            json_only(&common)?;
            let target = load_measure(&a)?;
            let seq = match b {
                Some(path) => {
                    let values: Vec<serde_json::Value> = serde_json::from_str(&read(&path)?)
                        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
                    values
                        .into_iter()
                        .enumerate()
                        .map(|(i, v)| {
                            io::parse_input(&v.to_string())
                                .map(|inp| match inp {
                                    Input::Measure(m) => m,
                                    Input::Triplet(t) => t.jumps().clone(),
                                })
                                .map_err(|e| Failure::Input(format!("{}[{i}]: {e}", path.display())))
                        })
                        .collect::<Outcome<Vec<_>>>()?
                }
                None => [1.0, 10.0, 100.0, 1000.0]
                    .iter()
                    .map(|n| truncate_measure(&target, 1.0 / n, 0.0).map(|r| r.0))
                    .collect::<levyot::Result<Vec<_>>>()?,
            };
            let report = lambda_convergence_report(&seq, &target)?;
            emit(&common, &io::convergence_to_json(&report)?, stdout)
        }
        Command::Classical { pair, common } => {
            json_only(&common)?;
            let (mu, nu) = (load_measure(&pair.a)?, load_measure(&pair.b)?);
            let sol = classical_ot_solve(&mu, &nu)?;
            emit(&common, &io::solution_to_json(&sol)?, stdout)
        }
    }
}

struct Row {
    t: f64,
    estimate: f64,
    std_error: f64,
    predicted: Option<f64>,
    bound: f64,
}

#[allow(clippy::too_many_arguments)]
fn simulate_rows(
    a: &LevyTriplet,
    b: &LevyTriplet,
    j: &CoupledTriplet,
    times: &[f64],
    horizons: &[f64],
    paths: usize,
    grid: usize,
    seed: u64,
) -> Outcome<Vec<Row>> {
    let w2 = generator_distance(a, b)?.total_sq;
    let origin = vec![0.0; a.dim()];
    let mut rows = Vec::new();
    for (t, est) in times.iter().zip(estimate_cost_growth(j, &origin, &origin, times, paths, seed)?) {
        rows.push(Row {
            t: *t,
            estimate: est.mean,
            std_error: est.std_error,
            predicted: Some(j.predicted_growth(&origin, &origin, *t)?),
            bound: t.max(t * t) * w2,
        });
    }
    let zero_mean = a.drift().is_origin() && b.drift().is_origin();
    for &h in horizons {
        let est = estimate_sup_distance(j, h, paths, grid, seed)?;
        let bound = if zero_mean { 4.0 * h * w2 } else { 8.0 * h.max(h * h) * w2 };
        rows.push(Row {
            t: h,
            estimate: est.mean,
            std_error: est.std_error,
            predicted: None,
            bound,
        });
    }
    Ok(rows)
}

/// Certificates for a coupled triplet against its own marginals (and against
/// `targets` when given). Returns the JSON report and whether all passed.
fn certify(
    j: &CoupledTriplet,
    targets: Option<&(LevyTriplet, LevyTriplet)>,
    tol_gap: f64,
) -> Outcome<(serde_json::Value, bool)> {
    let (ma, mb) = (j.marginal(true), j.marginal(false));
    let (a, b) = targets.map_or((&ma, &mb), |(a, b)| (a, b));
    let marginals = validate_coupling(j.jumps(), a.jumps(), b.jumps())?;
    let blocks = j.check_marginals(a, b)?;

    let sol = levy_ot_solve(ma.jumps(), mb.jumps())?;
    let duals = extract_duals_with_gap(&sol, ma.jumps(), mb.jumps(), tol_gap);
    let jump_cost = j.jumps().cost();
    let (duals_ok, gap) = match &duals {
        Ok((phi, psi)) => (true, jump_cost - phi.integrate(ma.jumps()) - psi.integrate(mb.jumps())),
        Err(e) if e.is_internal() => (false, f64::NAN),
        Err(e) => return Err(Failure::Input(e.to_string())),
    };
    let gap_ok = duals_ok && gap.abs() <= tol_gap * (1.0 + jump_cost);
    let monotone = check_cyclical_monotonicity(&j.jumps().support(), &CycleCheck::default());

    let k = j.cross_block();
    let diffusion_cost = 0.5 * (ma.diffusion().trace() + mb.diffusion().trace() - 2.0 * k.trace());
    let diffusion_opt = bures_wasserstein_sq(ma.diffusion(), mb.diffusion())?;
    let diffusion_gap = diffusion_cost - diffusion_opt;
    let diffusion_ok = diffusion_gap.abs() <= levyot::tol::NUM * (1.0 + diffusion_opt);

    let passed = marginals.passed && blocks && gap_ok && monotone.passed && diffusion_ok;
    let report = json!({
        "passed": passed,
        "marginals": {
            "passed": marginals.passed && blocks,
            "worst_defect": marginals.worst_defect,
            "tolerance": marginals.tolerance,
        },
        "jumps": {
            "cost": jump_cost,
            "optimal_cost": sol.cost,
            "duality_gap": if gap.is_finite() { json!(gap) } else { json!(null) },
            "duals_feasible": duals_ok,
            "monotone": monotone.passed,
            "worst_cycle_saving": monotone.worst_saving,
        },
        "diffusion": {
            "cost": diffusion_cost,
            "optimal_cost": diffusion_opt,
            "gap": diffusion_gap,
        },
    });
    Ok((report, passed))
}
