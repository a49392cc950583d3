//! File formats: JSON for structured inputs and results, CSV for plans,
//! grids and tables.
//!
//! Every writer has a matching parser; floats are written in shortest
//! round-trip form so a write/parse cycle is lossless.

use std::fs;
use std::io::Write;
use std::path::Path;

use dfot_core::dfdist::DfResult;
use dfot_core::experiments::newsvendor::{MixtureRow, NewsvendorInstance};
use dfot_core::experiments::parkinsons::{EpsilonRow, ParkinsonsReport, TrackedCoupling};
use dfot_core::experiments::sampling::SweepRow;
use dfot_core::{DiscreteMeasure, FeasibleRegion, Matrix};
use serde::{Deserialize, Serialize};

use crate::AppError;

pub type IoResult<T> = Result<T, AppError>;

pub fn read_text(path: &Path) -> IoResult<String> {
    fs::read_to_string(path).map_err(|e| AppError::input(format!("cannot read {}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> IoResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| AppError::output(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| AppError::output(format!("cannot write {}: {e}", path.display())))
}

fn from_json<'a, T: Deserialize<'a>>(text: &'a str, what: &str) -> IoResult<T> {
    serde_json::from_str(text).map_err(|e| AppError::input(format!("malformed {what}: {e}")))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeFile {
    pub extreme_points: Vec<Vec<f64>>,
}

pub fn parse_polytope(text: &str) -> IoResult<FeasibleRegion> {
    let file: PolytopeFile = from_json(text, "polytope JSON")?;
    Ok(FeasibleRegion::new(file.extreme_points)?)
}

pub fn polytope_to_json(region: &FeasibleRegion) -> String {
    to_json(&PolytopeFile {
        extreme_points: region.extreme_points().to_vec(),
    })
}

/// `weights` may be omitted for an empirical measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureFile {
    pub points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

pub fn parse_measure(text: &str) -> IoResult<DiscreteMeasure> {
    let file: MeasureFile = from_json(text, "measure JSON")?;
    Ok(match file.weights {
        Some(w) => DiscreteMeasure::new(file.points, w)?,
        None => DiscreteMeasure::from_samples(file.points)?,
    })
}

pub fn measure_to_json(m: &DiscreteMeasure) -> String {
    to_json(&MeasureFile {
        points: m.points().to_vec(),
        weights: Some(m.weights().to_vec()),
    })
}

/// Reads two measures that will be coupled. Weight totals that differ by
/// more than the transport feasibility tolerance are reported as infeasible
/// before per-measure validation.
pub fn read_measure_pair(mu: &Path, nu: &Path) -> IoResult<(DiscreteMeasure, DiscreteMeasure)> {
    let (tm, tn) = (read_text(mu)?, read_text(nu)?);
    let total = |text: &str| -> IoResult<f64> {
        let file: MeasureFile = from_json(text, "measure JSON")?;
        Ok(file.weights.map_or(1.0, |w| w.iter().sum()))
    };
    let (row_total, col_total) = (total(&tm)?, total(&tn)?);
    if (row_total - col_total).abs() > dfot_core::transport::FEASIBILITY_TOLERANCE {
        return Err(dfot_core::Error::Infeasible { row_total, col_total }.into());
    }
    Ok((parse_measure(&tm)?, parse_measure(&tn)?))
}

pub fn read_polytope(path: &Path) -> IoResult<FeasibleRegion> {
    parse_polytope(&read_text(path)?)
}

pub fn read_measure(path: &Path) -> IoResult<DiscreteMeasure> {
    parse_measure(&read_text(path)?)
}

/// Sparse plan: `entries` holds `[i, j, mass]` triplets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SparsePlan {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparsePlan {
    pub fn from_matrix(m: &Matrix) -> Self {
        let mut entries = Vec::new();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                if m[(i, j)] != 0.0 {
                    entries.push((i, j, m[(i, j)]));
                }
            }
        }
        Self {
            rows: m.rows(),
            cols: m.cols(),
            entries,
        }
    }

    pub fn to_matrix(&self) -> IoResult<Matrix> {
        let mut m = Matrix::zeros(self.rows, self.cols);
        for &(i, j, mass) in &self.entries {
            if i >= self.rows || j >= self.cols {
                return Err(AppError::input(format!("plan entry ({i}, {j}) outside {}x{}", self.rows, self.cols)));
            }
            m[(i, j)] += mass;
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualFile {
    pub f: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DfResultFile {
    pub value: f64,
    pub method: String,
    pub coupling: SparsePlan,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual: Option<DualFile>,
}

impl DfResultFile {
    pub fn from_result(res: &DfResult) -> Self {
        Self {
            value: res.value,
            method: res.method.as_str().to_string(),
            coupling: SparsePlan::from_matrix(res.coupling.plan()),
            dual: res.dual.as_ref().map(|d| DualFile { f: d.f.clone() }),
        }
    }
}

pub fn df_result_to_json(file: &DfResultFile) -> String {
    to_json(file)
}

pub fn parse_df_result(text: &str) -> IoResult<DfResultFile> {
    from_json(text, "result JSON")
}

/// Plan as `i,j,mass` rows (nonzero entries only).
pub fn plan_to_csv(m: &Matrix) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["i", "j", "mass"]).expect("in-memory write");
    for (i, j, mass) in SparsePlan::from_matrix(m).entries {
        w.write_record([i.to_string(), j.to_string(), mass.to_string()]).expect("in-memory write");
    }
    finish(w)
}

/// Parses triplet CSV into a `rows x cols` plan.
pub fn parse_plan_csv(text: &str, rows: usize, cols: usize) -> IoResult<Matrix> {
    let mut entries = Vec::new();
    let mut r = csv::Reader::from_reader(text.as_bytes());
    for rec in r.deserialize::<(usize, usize, f64)>() {
        entries.push(rec.map_err(|e| AppError::input(format!("malformed plan CSV: {e}")))?);
    }
    SparsePlan { rows, cols, entries }.to_matrix()
}

/// Dense plan JSON `{"rows", "cols", "data": [[...], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensePlan {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<f64>>,
}

pub fn plan_to_dense_json(m: &Matrix) -> String {
    to_json(&DensePlan {
        rows: m.rows(),
        cols: m.cols(),
        data: (0..m.rows()).map(|i| m.row(i).to_vec()).collect(),
    })
}

pub fn parse_dense_plan(text: &str) -> IoResult<Matrix> {
    let file: DensePlan = from_json(text, "dense plan JSON")?;
    if file.data.len() != file.rows || file.data.iter().any(|r| r.len() != file.cols) {
        return Err(AppError::input("dense plan shape does not match rows/cols"));
    }
    Ok(Matrix::from_rows(&file.data)?)
}

/// Reads a plan from `.json` (sparse result, or dense) or triplet CSV.
pub fn read_plan(path: &Path, rows: usize, cols: usize) -> IoResult<Matrix> {
    let text = read_text(path)?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let m = if is_json {
        match parse_df_result(&text) {
            Ok(file) => file.coupling.to_matrix()?,
            Err(_) => parse_dense_plan(&text)?,
        }
    } else {
        parse_plan_csv(&text, rows, cols)?
    };
    if m.shape() != (rows, cols) {
        return Err(AppError::input(format!(
            "plan is {}x{}, expected {rows}x{cols}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(m)
}

/// Bounding box and resolution of the histogram grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub size: usize,
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Grid {
    /// Covers the first two coordinates of every measure (one-dimensional
    /// measures get `y = 0`).
    pub fn covering(measures: &[DiscreteMeasure], size: usize) -> Self {
        let mut x = (f64::INFINITY, f64::NEG_INFINITY);
        let mut y = (f64::INFINITY, f64::NEG_INFINITY);
        for m in measures {
            for p in m.points() {
                let (px, py) = coords(p);
                x = (x.0.min(px), x.1.max(px));
                y = (y.0.min(py), y.1.max(py));
            }
        }
        let widen = |(lo, hi): (f64, f64)| if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
        Self {
            size,
            x: widen(x),
            y: widen(y),
        }
    }

    fn bin(&self, v: f64, (lo, hi): (f64, f64)) -> usize {
        let k = ((v - lo) / (hi - lo) * self.size as f64).floor();
        (k.max(0.0) as usize).min(self.size - 1)
    }

    fn center(&self, k: usize, (lo, hi): (f64, f64)) -> f64 {
        lo + (k as f64 + 0.5) * (hi - lo) / self.size as f64
    }

    pub fn histogram(&self, m: &DiscreteMeasure) -> Matrix {
        let mut h = Matrix::zeros(self.size, self.size);
        for (p, w) in m.iter() {
            let (px, py) = coords(p);
            h[(self.bin(px, self.x), self.bin(py, self.y))] += w;
        }
        h
    }
}

fn coords(p: &[f64]) -> (f64, f64) {
    (p[0], p.get(1).copied().unwrap_or(0.0))
}

/// Grid CSV `t,gx,gy,mass` with nonempty cells of each slice.
pub fn grid_csv(times: &[f64], measures: &[DiscreteMeasure], grid: &Grid) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "gx", "gy", "mass"]).expect("in-memory write");
    for (t, m) in times.iter().zip(measures) {
        let h = grid.histogram(m);
        for i in 0..grid.size {
            for j in 0..grid.size {
                if h[(i, j)] > 0.0 {
                    w.write_record([
                        t.to_string(),
                        grid.center(i, grid.x).to_string(),
                        grid.center(j, grid.y).to_string(),
                        h[(i, j)].to_string(),
                    ])
                    .expect("in-memory write");
                }
            }
        }
    }
    finish(w)
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
pub struct GridRow {
    pub t: f64,
    pub gx: f64,
    pub gy: f64,
    pub mass: f64,
}

pub fn parse_grid_csv(text: &str) -> IoResult<Vec<GridRow>> {
    parse_rows(text, "grid CSV")
}

fn parse_rows<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> IoResult<Vec<T>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| AppError::input(format!("malformed {what}: {e}")))
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("in-memory flush");
    String::from_utf8(bytes).expect("csv output is utf-8")
}

/// Newsvendor configuration; omitted fields take the bundled defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewsvendorConfig {
    pub pmfs: Vec<Vec<f64>>,
    #[serde(default)]
    pub demand: Option<Vec<f64>>,
    #[serde(default)]
    pub grid: Option<Vec<f64>>,
    #[serde(default = "default_b")]
    pub b: f64,
    #[serde(default = "default_h")]
    pub h: f64,
}

fn default_b() -> f64 {
    dfot_core::experiments::newsvendor::DEFAULT_UNDERAGE
}

fn default_h() -> f64 {
    dfot_core::experiments::newsvendor::DEFAULT_OVERAGE
}

pub fn parse_newsvendor_config(text: &str) -> IoResult<NewsvendorInstance> {
    let cfg: NewsvendorConfig = from_json(text, "newsvendor config")?;
    let default_grid: Vec<f64> = (5..=15).map(f64::from).collect();
    let grid = cfg.grid.unwrap_or_else(|| default_grid.clone());
    let demand = cfg.demand.unwrap_or_else(|| grid.clone());
    Ok(NewsvendorInstance::new(demand, grid, cfg.pmfs, cfg.b, cfg.h)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureCsvRow {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub w_dfo: f64,
    pub regret: f64,
    pub w_dfr: f64,
    pub tv: f64,
    pub kl: f64,
    pub w1: f64,
    pub w2: f64,
}

pub fn mixture_table_csv(rows: &[MixtureRow]) -> String {
    write_rows(rows.iter().map(|r| MixtureCsvRow {
        lambda1: r.lambda[0],
        lambda2: r.lambda[1],
        lambda3: r.lambda[2],
        w_dfo: r.w_dfo,
        regret: r.regret,
        w_dfr: r.w_dfr,
        tv: r.tv,
        kl: r.kl,
        w1: r.w1,
        w2: r.w2,
    }))
}

pub fn parse_mixture_table(text: &str) -> IoResult<Vec<MixtureCsvRow>> {
    parse_rows(text, "mixture table")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCsvRow {
    pub n: usize,
    pub optimistic_mean: f64,
    pub optimistic_q10: f64,
    pub optimistic_q90: f64,
    pub robust_mean: Option<f64>,
    pub robust_q10: Option<f64>,
    pub robust_q90: Option<f64>,
}

pub fn sweep_table_csv(rows: &[SweepRow]) -> String {
    write_rows(rows.iter().map(|r| SweepCsvRow {
        n: r.n,
        optimistic_mean: r.optimistic.mean,
        optimistic_q10: r.optimistic.q10,
        optimistic_q90: r.optimistic.q90,
        robust_mean: r.robust.map(|s| s.mean),
        robust_q10: r.robust.map(|s| s.q10),
        robust_q90: r.robust.map(|s| s.q90),
    }))
}

pub fn parse_sweep_table(text: &str) -> IoResult<Vec<SweepCsvRow>> {
    parse_rows(text, "sample-error table")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantityRow {
    pub quantity: String,
    pub value: f64,
}

/// Day-50 versus day-150 distances.
pub fn distance_table_csv(report: &ParkinsonsReport) -> String {
    let d = &report.distances;
    let rows = [
        ("w1_severity", d.w1_severity),
        ("w2_severity", d.w2_severity),
        ("w_dfo", d.w_dfo),
        ("regret", d.regret),
        ("w_dfr", d.w_dfr),
        ("true_transition_mean", report.true_transition_mean()),
        ("true_transition_median", report.true_transition_median()),
    ];
    write_rows(rows.iter().map(|(q, v)| QuantityRow {
        quantity: q.to_string(),
        value: *v,
    }))
}

pub fn parse_quantity_table(text: &str) -> IoResult<Vec<QuantityRow>> {
    parse_rows(text, "quantity table")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowRow {
    pub center_day: i64,
    pub patients: usize,
}

pub fn window_table_csv(report: &ParkinsonsReport) -> String {
    write_rows(report.windows.iter().map(|w| WindowRow {
        center_day: w.center,
        patients: w.len(),
    }))
}

pub fn parse_window_table(text: &str) -> IoResult<Vec<WindowRow>> {
    parse_rows(text, "window table")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodRow {
    pub method: String,
    pub mean_tracked_spo: f64,
}

/// Mean tracked loss per coupling.
pub fn tracked_table_csv(report: &ParkinsonsReport) -> String {
    write_rows(TrackedCoupling::ALL.iter().map(|&k| MethodRow {
        method: k.as_str().to_string(),
        mean_tracked_spo: report.tracked.mean(k),
    }))
}

pub fn parse_tracked_table(text: &str) -> IoResult<Vec<MethodRow>> {
    parse_rows(text, "tracked table")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonCsvRow {
    pub epsilon: f64,
    pub e_dfo_tracked: f64,
    pub e_dfr_tracked: f64,
    pub e_dfo_value: f64,
    pub e_dfr_value: f64,
    pub converged: bool,
}

pub fn epsilon_table_csv(rows: &[EpsilonRow]) -> String {
    write_rows(rows.iter().map(|r| EpsilonCsvRow {
        epsilon: r.epsilon,
        e_dfo_tracked: r.e_dfo_tracked,
        e_dfr_tracked: r.e_dfr_tracked,
        e_dfo_value: r.e_dfo_value,
        e_dfr_value: r.e_dfr_value,
        converged: r.converged,
    }))
}

pub fn parse_epsilon_table(text: &str) -> IoResult<Vec<EpsilonCsvRow>> {
    parse_rows(text, "epsilon table")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackedLossRow {
    pub subject: u32,
    pub loss_optimistic: f64,
    pub loss_robust: f64,
    pub loss_independent: f64,
    pub loss_w2: f64,
}

pub fn tracked_losses_csv(report: &ParkinsonsReport) -> String {
    let t = &report.tracked;
    write_rows((0..t.subjects.len()).map(|k| TrackedLossRow {
        subject: t.subjects[k],
        loss_optimistic: t.optimistic[k],
        loss_robust: t.robust[k],
        loss_independent: t.independent[k],
        loss_w2: t.w2[k],
    }))
}

pub fn parse_tracked_losses(text: &str) -> IoResult<Vec<TrackedLossRow>> {
    parse_rows(text, "tracked losses")
}

fn write_rows<T: Serialize>(rows: impl IntoIterator<Item = T>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory write");
    }
    finish(w)
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> IoResult<()> {
    match path {
        Some(p) => write_text(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| AppError::output(format!("cannot write stdout: {e}")))
        }
    }
}
