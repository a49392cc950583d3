//! `dfot` subcommands.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use dfot_core::dfdist::{self, DfResult, Mode, OptimisticMethod, Symmetrization};
use dfot_core::experiments::newsvendor::{default_table, NewsvendorInstance};
use dfot_core::experiments::parkinsons::{self, CohortWindow, FeatureRanges, EPSILON_GRID, HALF_WIDTH};
use dfot_core::experiments::sampling::{self, reference_values, run_trial, summarize, SweepRow};
use dfot_core::interpolate::{self, AverageMode, ReducedGeodesic};
use dfot_core::{Coupling, DiscreteMeasure, FeasibleRegion};
use rayon::prelude::*;

use crate::io::{self, DfResultFile, Grid};
use crate::parkinsons_csv::read_records;
use crate::verify::{self, CheckKind};
use crate::{fixtures, AppError};

const EXIT_CODES: &str = "Exit codes: 0 success, 1 verification failure, 2 bad input, 3 infeasible marginals.";

#[derive(Debug, Parser)]
#[command(name = "dfot", version, about = "Decision-focused optimal transport", after_help = EXIT_CODES)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Distance between two measures of cost vectors.
    Distance(DistanceArgs),
    /// Coupling-induced interpolation slices and a histogram grid.
    Interpolate(InterpolateArgs),
    /// Property checks on an instance (bundled fixtures by default).
    Verify(VerifyArgs),
    /// Newsvendor mixture-distance table.
    Newsvendor(NewsvendorArgs),
    /// Telemonitoring care-plan pipeline.
    Parkinsons(ParkinsonsArgs),
    /// Two-sample estimation-error sweep.
    SampleError(SampleErrorArgs),
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    /// Polytope JSON `{"extreme_points": [...]}`.
    #[arg(long)]
    pub polytope: PathBuf,
    /// Source measure JSON `{"points": [...], "weights": [...]}`.
    #[arg(long)]
    pub mu: PathBuf,
    /// Target measure JSON.
    #[arg(long)]
    pub nu: PathBuf,
}

impl InstanceArgs {
    fn load(&self) -> Result<(FeasibleRegion, DiscreteMeasure, DiscreteMeasure), AppError> {
        let region = io::read_polytope(&self.polytope)?;
        let (mu, nu) = io::read_measure_pair(&self.mu, &self.nu)?;
        Ok((region, mu, nu))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DistanceKind {
    Optimistic,
    Robust,
    Regret,
    SymAdd,
    SymJs,
    Entropic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Optimistic,
    Robust,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Optimistic => Mode::Optimistic,
            ModeArg::Robust => Mode::Robust,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Direct,
    Reduction,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, value_enum, default_value = "optimistic")]
    pub kind: DistanceKind,
    /// Which distance the symmetric and entropic kinds are built from.
    #[arg(long, value_enum, default_value = "optimistic")]
    pub mode: ModeArg,
    /// Regularization strength for `--kind entropic`.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Solver for the optimistic distance; defaults to the smaller problem.
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Result JSON with value, method, sparse coupling and duals.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Coupling as `i,j,mass` CSV.
    #[arg(long)]
    pub plan_csv: Option<PathBuf>,
    /// Coupling as dense JSON.
    #[arg(long)]
    pub plan_json: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CouplingArg {
    Optimistic,
    Robust,
    Independent,
    W2,
    ReducedMccann,
}

#[derive(Debug, Args)]
pub struct InterpolateArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, value_enum, default_value = "optimistic")]
    pub coupling: CouplingArg,
    /// Comma-separated times in [0, 1].
    #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
    pub t: Vec<f64>,
    /// Directory for `t_<t>.json` slices and `grid.csv`.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Histogram cells per axis.
    #[arg(long, default_value_t = 64)]
    pub grid_size: usize,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, requires_all = ["mu", "nu"])]
    pub polytope: Option<PathBuf>,
    #[arg(long, requires_all = ["polytope", "nu"])]
    pub mu: Option<PathBuf>,
    #[arg(long, requires_all = ["polytope", "mu"])]
    pub nu: Option<PathBuf>,
    /// Coupling to check against the marginals (CSV triplets or JSON).
    #[arg(long)]
    pub plan: Option<PathBuf>,
    /// Checks to run; all by default.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub check: Vec<CheckKind>,
}

#[derive(Debug, Args)]
pub struct NewsvendorArgs {
    /// Config JSON `{"pmfs", "demand"?, "grid"?, "b"?, "h"?}`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Table CSV destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ParkinsonsArgs {
    /// UCI telemonitoring CSV.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Comma-separated regularization grid.
    #[arg(long, value_delimiter = ',')]
    pub epsilon: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct SampleErrorArgs {
    /// Telemonitoring CSV; references are the day-50 and day-150 windows.
    #[arg(long, conflicts_with_all = ["polytope", "mu", "nu"])]
    pub data: Option<PathBuf>,
    #[arg(long, requires_all = ["mu", "nu"])]
    pub polytope: Option<PathBuf>,
    #[arg(long, requires_all = ["polytope", "nu"])]
    pub mu: Option<PathBuf>,
    #[arg(long, requires_all = ["polytope", "mu"])]
    pub nu: Option<PathBuf>,
    /// Atoms per side of the synthetic references used without inputs.
    #[arg(long, default_value_t = 200)]
    pub synthetic_size: usize,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, env = "DFOT_SEED", default_value_t = sampling::DEFAULT_SEED)]
    pub seed: u64,
    /// Also sweep the robust distance.
    #[arg(long)]
    pub robust: bool,
    /// Worker threads for the trials.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs a parsed command and returns its exit code.
pub fn run(cli: Cli) -> Result<i32, AppError> {
    match cli.command {
        Command::Distance(a) => distance(&a),
        Command::Interpolate(a) => interpolate(&a),
        Command::Verify(a) => verify_cmd(&a),
        Command::Newsvendor(a) => newsvendor(&a),
        Command::Parkinsons(a) => parkinsons_cmd(&a),
        Command::SampleError(a) => sample_error(&a),
    }
}

fn headline(value: f64) {
    println!("{value}");
}

fn distance(a: &DistanceArgs) -> Result<i32, AppError> {
    let (region, mu, nu) = a.instance.load()?;
    let method = match a.method {
        Some(MethodArg::Direct) => OptimisticMethod::Direct,
        Some(MethodArg::Reduction) => OptimisticMethod::Reduction,
        None => OptimisticMethod::auto(&region, &mu),
    };
    let result: Option<DfResult> = match a.kind {
        DistanceKind::Optimistic => Some(dfdist::optimistic(&region, &mu, &nu, method)?),
        DistanceKind::Robust => Some(dfdist::robust(&region, &mu, &nu)?),
        DistanceKind::Regret => Some(dfdist::independent(&region, &mu, &nu)?),
        DistanceKind::Entropic => {
            let eps = a
                .epsilon
                .ok_or_else(|| AppError::input("--kind entropic needs --epsilon"))?;
            Some(dfdist::entropic_df(&region, &mu, &nu, eps, a.mode.into())?)
        }
        DistanceKind::SymAdd | DistanceKind::SymJs => None,
    };
    let Some(res) = result else {
        if a.out.is_some() || a.plan_csv.is_some() || a.plan_json.is_some() {
            return Err(AppError::input("symmetric distances have no single coupling to write"));
        }
        let kind = if a.kind == DistanceKind::SymAdd {
            Symmetrization::Additive
        } else {
            Symmetrization::JensenShannon
        };
        headline(dfdist::symmetric(&region, &mu, &nu, kind, a.mode.into())?);
        return Ok(0);
    };
    if let Some(status) = res.entropic.filter(|s| !s.converged) {
        eprintln!(
            "warning: entropic solver stopped after {} iterations (marginal error {:e})",
            status.iterations, status.marginal_error
        );
    }
    if let Some(path) = &a.out {
        io::write_text(path, &io::df_result_to_json(&DfResultFile::from_result(&res)))?;
    }
    if let Some(path) = &a.plan_csv {
        io::write_text(path, &io::plan_to_csv(res.coupling.plan()))?;
    }
    if let Some(path) = &a.plan_json {
        io::write_text(path, &io::plan_to_dense_json(res.coupling.plan()))?;
    }
    headline(res.value);
    Ok(0)
}

/// File name of the slice at time `t`.
pub fn slice_file_name(t: f64) -> String {
    format!("t_{t}.json")
}

fn interpolate(a: &InterpolateArgs) -> Result<i32, AppError> {
    let (region, mu, nu) = a.instance.load()?;
    if a.t.is_empty() {
        return Err(AppError::input("--t needs at least one time"));
    }
    if a.grid_size == 0 {
        return Err(AppError::input("--grid-size must be positive"));
    }
    let (slices, value) = if a.coupling == CouplingArg::ReducedMccann {
        let geo = ReducedGeodesic::new(&region, &mu, &nu)?;
        let slices = a
            .t
            .iter()
            .map(|&t| geo.at(t).map(|s| s.nu_t))
            .collect::<Result<Vec<_>, _>>()?;
        (slices, geo.w2_sq().sqrt())
    } else {
        let mode = match a.coupling {
            CouplingArg::Optimistic => AverageMode::Optimistic,
            CouplingArg::Robust => AverageMode::Robust,
            CouplingArg::Independent => AverageMode::Independent,
            _ => AverageMode::W2,
        };
        let gamma: Coupling = interpolate::average_coupling(&region, &mu, &nu, mode)?;
        let slices = a
            .t
            .iter()
            .map(|&t| interpolate::interpolant(&gamma, &mu, &nu, t))
            .collect::<Result<Vec<_>, _>>()?;
        (slices, dfdist::df_divergence(&region, &mu, &nu, &gamma)?)
    };
    for (t, m) in a.t.iter().zip(&slices) {
        io::write_text(&a.out_dir.join(slice_file_name(*t)), &io::measure_to_json(m))?;
    }
    let grid = Grid::covering(&slices, a.grid_size);
    io::write_text(&a.out_dir.join("grid.csv"), &io::grid_csv(&a.t, &slices, &grid))?;
    headline(value);
    Ok(0)
}

fn verify_cmd(a: &VerifyArgs) -> Result<i32, AppError> {
    let (region, mu, nu) = match (&a.polytope, &a.mu, &a.nu) {
        (Some(p), Some(m), Some(n)) => {
            let (mu, nu) = io::read_measure_pair(m, n)?;
            (io::read_polytope(p)?, mu, nu)
        }
        _ => (
            io::parse_polytope(fixtures::POLYTOPE)?,
            io::parse_measure(fixtures::MU)?,
            io::parse_measure(fixtures::NU)?,
        ),
    };
    let plan = match &a.plan {
        Some(p) => Some(io::read_plan(p, mu.len(), nu.len())?),
        None => None,
    };
    let kinds: Vec<CheckKind> = if a.check.is_empty() {
        CheckKind::ALL.to_vec()
    } else {
        a.check.clone()
    };
    let inst = verify::Instance {
        region: &region,
        mu: &mu,
        nu: &nu,
        plan: plan.as_ref(),
    };
    let outcomes = verify::run(&inst, &kinds)?;
    for o in &outcomes {
        println!("{}", o.line());
    }
    Ok(if outcomes.iter().any(|o| o.passed == Some(false)) { 1 } else { 0 })
}

fn newsvendor(a: &NewsvendorArgs) -> Result<i32, AppError> {
    let instance = match &a.config {
        Some(p) => io::parse_newsvendor_config(&io::read_text(p)?)?,
        None => NewsvendorInstance::default_instance(),
    };
    if instance.pmfs().len() != 3 {
        return Err(AppError::input("the mixture table needs exactly three demand types"));
    }
    let rows = default_table(&instance)?;
    io::emit(a.out.as_deref(), &io::mixture_table_csv(&rows))?;
    Ok(0)
}

fn parkinsons_cmd(a: &ParkinsonsArgs) -> Result<i32, AppError> {
    let records = read_records(&a.data)?;
    let grid = if a.epsilon.is_empty() {
        EPSILON_GRID.to_vec()
    } else {
        a.epsilon.clone()
    };
    let report = parkinsons::run_pipeline(&records, &grid)?;
    let dir = &a.out_dir;
    io::write_text(&dir.join("windows.csv"), &io::window_table_csv(&report))?;
    io::write_text(&dir.join("distances.csv"), &io::distance_table_csv(&report))?;
    io::write_text(&dir.join("tracked.csv"), &io::tracked_table_csv(&report))?;
    io::write_text(&dir.join("epsilon.csv"), &io::epsilon_table_csv(&report.epsilon_rows))?;
    io::write_text(&dir.join("tracked_losses.csv"), &io::tracked_losses_csv(&report))?;
    headline(report.distances.w_dfo);
    Ok(0)
}

/// Day-50 and day-150 cost measures with the care-plan region.
pub fn parkinsons_references(path: &Path) -> Result<(FeasibleRegion, DiscreteMeasure, DiscreteMeasure), AppError> {
    let records = read_records(path)?;
    let ranges = FeatureRanges::from_records(&records)?;
    let w50 = CohortWindow::build(&records, 50, HALF_WIDTH, &ranges)?;
    let w150 = CohortWindow::build(&records, 150, HALF_WIDTH, &ranges)?;
    Ok((parkinsons::care_plan_region(), w50.cost_measure()?, w150.cost_measure()?))
}

/// Sweep with trials spread over `jobs` threads; results do not depend on
/// `jobs`.
#[allow(clippy::too_many_arguments)]
pub fn parallel_sweep(
    region: &FeasibleRegion,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    n_grid: &[usize],
    trials: usize,
    seed: u64,
    with_robust: bool,
    jobs: usize,
) -> Result<Vec<SweepRow>, AppError> {
    if trials == 0 {
        return Err(AppError::input("--trials must be positive"));
    }
    let max_n = mu.len().min(nu.len());
    if let Some(n) = n_grid.iter().find(|&&n| n == 0 || n > max_n) {
        return Err(AppError::input(format!("sample size {n} outside 1..={max_n}")));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| AppError::input(format!("cannot start worker threads: {e}")))?;
    let reference = reference_values(region, mu, nu, with_robust)?;
    pool.install(|| {
        n_grid
            .iter()
            .enumerate()
            .map(|(ni, &n)| {
                let errors = (0..trials)
                    .into_par_iter()
                    .map(|t| run_trial(region, mu, nu, &reference, n, seed, ni, t))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(summarize(n, &errors)?)
            })
            .collect()
    })
}

fn sample_error(a: &SampleErrorArgs) -> Result<i32, AppError> {
    let (region, mu, nu, default_grid) = if let Some(path) = &a.data {
        let (r, m, n) = parkinsons_references(path)?;
        (r, m, n, vec![5, 10, 18, 35])
    } else if let (Some(p), Some(m), Some(n)) = (&a.polytope, &a.mu, &a.nu) {
        let r = io::read_polytope(p)?;
        let (m, n) = io::read_measure_pair(m, n)?;
        let cap = m.len().min(n.len());
        let grid = [5, 10, 20, 40, 80, 160].into_iter().filter(|&k| k <= cap).collect();
        (r, m, n, grid)
    } else {
        let (r, m, n) = sampling::synthetic_references(a.seed, a.synthetic_size)?;
        let grid = [5, 10, 20, 40, 80, 160]
            .into_iter()
            .filter(|&k| k <= a.synthetic_size)
            .collect();
        (r, m, n, grid)
    };
    let grid = if a.n.is_empty() { default_grid } else { a.n.clone() };
    let rows = parallel_sweep(&region, &mu, &nu, &grid, a.trials, a.seed, a.robust, a.jobs)?;
    io::emit(a.out.as_deref(), &io::sweep_table_csv(&rows))?;
    Ok(0)
}
