//! Measurable quantities of an interpolation study: Lebesgue functions and constants,
//! discrete error norms, native-norm growth along nested designs, Lagrange decay fits
//! and per-level convergence reports.
//!
//! All sup-type quantities are maxima over an [`EvalGrid`] and therefore lower bounds
//! of the continuous suprema. `L²` norms use the grid's composite trapezoid weights,
//! which are `O(spacing²)` accurate for `C²` integrands and unquantified otherwise.

use std::fmt::{self, Write as _};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{sampling_condition, FillMethod, LevelGeometry, NestedDesign, PointSet, SamplingCondition};
use crate::grid::EvalGrid;
use crate::interp::{Interpolant, InterpolationSystem};
use crate::kernel::{distance, Kernel};
use crate::target::Target;

/// Lagrange values below this are left out of decay fits.
pub const DECAY_FLOOR: f64 = 1e-12;
/// Lagrange values within this factor of the evaluation rounding floor are left out
/// of decay fits.
pub const DECAY_NOISE_FACTOR: f64 = 100.0;
/// Minimum number of grid points a decay fit needs.
pub const DECAY_MIN_POINTS: usize = 8;

fn check_grid(kernel: &Kernel, grid: &EvalGrid) -> Result<()> {
    if grid.dim() != kernel.dim() {
        return Err(Error::DimensionMismatch {
            expected: kernel.dim(),
            got: grid.dim(),
        });
    }
    Ok(())
}

/// `Λ_X(x) = Σ_i |l_i(x)|` at every grid point.
pub fn lebesgue_function(kernel: &Kernel, nodes: &PointSet, grid: &EvalGrid) -> Result<Vec<f64>> {
    check_grid(kernel, grid)?;
    let system = InterpolationSystem::new(kernel, nodes).map_err(|e| e.at_level(nodes.len()))?;
    system.lagrange_basis().lebesgue_function(grid.coords())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LebesgueConstant {
    pub value: f64,
    /// Grid index attaining the maximum (lowest index on ties).
    pub argmax: usize,
    pub jitter: f64,
}

/// Index and value of the maximum, lowest index on ties.
fn argmax(values: &[f64]) -> (usize, f64) {
    values.iter().enumerate().fold(
        (0, f64::NEG_INFINITY),
        |best, (i, &v)| if v > best.1 { (i, v) } else { best },
    )
}

/// `Λ_X = max_grid Λ_X(x)`, a lower bound of the true Lebesgue constant.
pub fn lebesgue_constant(kernel: &Kernel, nodes: &PointSet, grid: &EvalGrid) -> Result<LebesgueConstant> {
    check_grid(kernel, grid)?;
    let system = InterpolationSystem::new(kernel, nodes).map_err(|e| e.at_level(nodes.len()))?;
    lebesgue_constant_of(&system, grid)
}

fn lebesgue_constant_of(system: &InterpolationSystem, grid: &EvalGrid) -> Result<LebesgueConstant> {
    let basis = system.lagrange_basis();
    let lf = basis.lebesgue_function(grid.coords())?;
    let (i, v) = argmax(&lf);
    Ok(LebesgueConstant {
        value: v,
        argmax: i,
        jitter: basis.jitter(),
    })
}

fn pointwise_errors(target: &Target, s: &Interpolant, grid: &EvalGrid) -> Result<Vec<f64>> {
    check_grid(s.kernel(), grid)?;
    let approx = s.evaluate(grid.coords())?;
    Ok(grid
        .coords()
        .par_chunks(grid.dim())
        .zip(approx.par_iter())
        .map(|(p, a)| target.eval(p) - a)
        .collect())
}

/// `max_grid |f − s|`.
pub fn sup_error(target: &Target, s: &Interpolant, grid: &EvalGrid) -> Result<f64> {
    Ok(pointwise_errors(target, s, grid)?
        .iter()
        .fold(0.0f64, |m, e| m.max(e.abs())))
}

/// `(Σ w_j (f − s)²(p_j))^{1/2}` with trapezoid weights.
pub fn l2_error(target: &Target, s: &Interpolant, grid: &EvalGrid) -> Result<f64> {
    let errs = pointwise_errors(target, s, grid)?;
    Ok(errs
        .iter()
        .zip(grid.weights())
        .map(|(e, w)| w * e * e)
        .sum::<f64>()
        .sqrt())
}

/// Least-squares slope of `y` against `x`.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - (intercept + slope * a);
            r * r
        })
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Some((slope, intercept, r2))
}

/// Slope of `log y` against `log x`, `None` if any value is non-positive or not finite.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.iter().chain(y).any(|v| !(v.is_finite() && *v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    least_squares_slope(&lx, &ly).map(|(s, _, _)| s)
}

/// Advisory label for a native-norm sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundedness {
    BoundedLike,
    DivergingLike,
    Inconclusive,
}

impl Boundedness {
    pub fn label(self) -> &'static str {
        match self {
            Boundedness::BoundedLike => "bounded-like",
            Boundedness::DivergingLike => "diverging-like",
            Boundedness::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Boundedness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Relative variation of the last quarter of a sequence below which it may count as bounded.
pub const BOUNDED_VARIATION: f64 = 0.10;
/// Log-log slope of norm against `n` below which a sequence may count as bounded.
pub const BOUNDED_SLOPE: f64 = 0.05;
/// Log-log slope above which a sequence counts as diverging.
pub const DIVERGING_SLOPE: f64 = 0.15;

#[derive(Debug, Clone, PartialEq)]
pub struct NormGrowth {
    /// `(n, ‖s^n‖)` per successfully fitted level.
    pub entries: Vec<(usize, f64)>,
    /// Levels whose `rᵀα` was clamped from a negative value.
    pub clamped: Vec<usize>,
    /// Jitter used per entry.
    pub jitter: Vec<f64>,
    pub slope: Option<f64>,
    pub last_quarter_variation: Option<f64>,
    pub classification: Boundedness,
    /// First failing level; the sequence stops there.
    pub failure: Option<Error>,
}

fn tail_start(len: usize, fraction_denominator: usize) -> usize {
    let keep = len.div_ceil(fraction_denominator).max(2).min(len);
    len - keep
}

/// Three-way label from the last-quarter variation and the log-log slope of norm vs
/// `n` over the last half of the levels.
pub fn classify_growth(entries: &[(usize, f64)]) -> (Boundedness, Option<f64>, Option<f64>) {
    if entries.len() < 2 {
        return (Boundedness::Inconclusive, None, None);
    }
    let half = &entries[tail_start(entries.len(), 2)..];
    let ns: Vec<f64> = half.iter().map(|e| e.0 as f64).collect();
    let norms: Vec<f64> = half.iter().map(|e| e.1).collect();
    let slope = loglog_slope(&ns, &norms);
    let quarter = &entries[tail_start(entries.len(), 4)..];
    let hi = quarter.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
    let lo = quarter.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
    let variation = (hi > 0.0).then(|| (hi - lo) / hi).or(Some(0.0));
    let label = match (slope, variation) {
        (_, Some(v)) if hi == 0.0 && v == 0.0 => Boundedness::BoundedLike,
        (Some(s), Some(v)) if v < BOUNDED_VARIATION && s < BOUNDED_SLOPE => Boundedness::BoundedLike,
        (Some(s), _) if s > DIVERGING_SLOPE => Boundedness::DivergingLike,
        _ => Boundedness::Inconclusive,
    };
    (label, slope, variation)
}

/// Native norms `‖s_f^n‖` along a nested design, with an advisory boundedness label.
pub fn norm_growth_sequence(target: &Target, kernel: &Kernel, design: &NestedDesign) -> NormGrowth {
    let mut entries = Vec::new();
    let mut clamped = Vec::new();
    let mut jitter = Vec::new();
    let mut failure = None;
    for i in 0..design.levels().len() {
        let pts = design.level_points(i);
        let n = pts.len();
        let data = target.sample(pts.coords(), pts.dim());
        match crate::interp::fit(kernel, &pts, &data) {
            Ok(s) => {
                let norm = s.native_norm();
                if norm.clamped {
                    clamped.push(n);
                }
                entries.push((n, norm.value));
                jitter.push(s.jitter());
            }
            Err(e) => {
                failure = Some(e.at_level(n));
                break;
            }
        }
    }
    let (classification, slope, last_quarter_variation) = classify_growth(&entries);
    NormGrowth {
        entries,
        clamped,
        jitter,
        slope,
        last_quarter_variation,
        classification,
        failure,
    }
}

/// Exponential envelope fit `|l_i(x)| ≈ C exp(−ν |x − x_i| / h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Fitted decay rate `ν̂` (negated slope).
    pub rate: f64,
    /// `exp(intercept)`.
    pub prefactor: f64,
    pub r2: f64,
    /// `max |l_i(x)| exp(ν̂ |x − x_i| / h)` over grid points above the rounding floor.
    pub envelope: f64,
    pub points_used: usize,
}

/// Least-squares fit of `log |l_i|` against `|x − x_i| / h` on the grid, skipping the
/// node's own cell (`|x − x_i| < h`), values below [`DECAY_FLOOR`] and values within
/// [`DECAY_NOISE_FACTOR`] of the evaluation rounding floor.
pub fn decay_profile(kernel: &Kernel, nodes: &PointSet, i: usize, grid: &EvalGrid, h: f64) -> Result<DecayFit> {
    if kernel.dim() != 1 {
        return Err(Error::invalid("decay profiles are defined on intervals only"));
    }
    check_grid(kernel, grid)?;
    if h.is_nan() || h <= 0.0 {
        return Err(Error::invalid(format!("fill distance must be positive, got {h}")));
    }
    let l = InterpolationSystem::new(kernel, nodes)?.lagrange(i)?;
    let values = l.evaluate(grid.coords())?;
    let floor = l.rounding_floor(grid.coords())?;
    let xi = nodes.point(i);
    let scaled: Vec<f64> = grid.iter().map(|p| distance(p, xi) / h).collect();
    let (ts, logs): (Vec<f64>, Vec<f64>) = scaled
        .iter()
        .zip(values.iter().zip(&floor))
        .filter(|(t, (v, fl))| **t >= 1.0 && v.abs() > DECAY_FLOOR && v.abs() > DECAY_NOISE_FACTOR * **fl)
        .map(|(t, (v, _))| (*t, v.abs().ln()))
        .unzip();
    if ts.len() < DECAY_MIN_POINTS {
        return Err(Error::InsufficientFitData {
            required: DECAY_MIN_POINTS,
            got: ts.len(),
        });
    }
    let (slope, intercept, r2) = least_squares_slope(&ts, &logs).ok_or(Error::InsufficientFitData {
        required: DECAY_MIN_POINTS,
        got: ts.len(),
    })?;
    let rate = -slope;
    let envelope = scaled
        .iter()
        .zip(values.iter().zip(&floor))
        .filter(|(_, (v, fl))| v.abs() > DECAY_NOISE_FACTOR * **fl)
        .map(|(t, (v, _))| v.abs() * (rate * t).exp())
        .fold(0.0f64, f64::max);
    Ok(DecayFit {
        rate,
        prefactor: intercept.exp(),
        r2,
        envelope,
        points_used: ts.len(),
    })
}

/// A design level: the node set and its measured geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignLevel {
    pub points: PointSet,
    pub geometry: LevelGeometry,
}

impl DesignLevel {
    pub fn measure(points: PointSet, method: FillMethod) -> Result<Self> {
        let geometry = LevelGeometry::measure(&points, method)?;
        Ok(DesignLevel { points, geometry })
    }
}

impl NestedDesign {
    pub fn design_levels(&self) -> Vec<DesignLevel> {
        self.levels()
            .iter()
            .enumerate()
            .map(|(i, g)| DesignLevel {
                points: self.level_points(i),
                geometry: *g,
            })
            .collect()
    }
}

/// One row of a [`DiagnosticsReport`]. Quantities that were not requested are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub n: usize,
    pub fill: f64,
    pub separation: f64,
    pub mesh_ratio: f64,
    pub lebesgue: Option<f64>,
    pub native_norm: Option<f64>,
    pub sup_error: Option<f64>,
    pub l2_error: Option<f64>,
    pub jitter: Option<f64>,
    pub sampling: Option<SamplingCondition>,
    /// `ok`, or a description of what went wrong at this level.
    pub status: String,
}

impl ReportRow {
    pub fn is_ok(&self) -> bool {
        self.status.starts_with("ok")
    }
}

pub const REPORT_COLUMNS: [&str; 11] = [
    "n",
    "h",
    "q",
    "rho",
    "lambda",
    "native_norm",
    "sup_error",
    "l2_error",
    "jitter",
    "sampling_condition",
    "status",
];

/// Per-level rows plus `# key = value` metadata.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagnosticsReport {
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<ReportRow>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

impl DiagnosticsReport {
    pub fn ok_rows(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| r.is_ok())
    }

    pub fn column(&self, f: impl Fn(&ReportRow) -> Option<f64>) -> Vec<Option<f64>> {
        self.rows.iter().map(f).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k} = {v}");
        }
        out.push_str(&REPORT_COLUMNS.join(","));
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:?},{:?},{:?},{},{},{},{},{},{},{}",
                r.n,
                r.fill,
                r.separation,
                r.mesh_ratio,
                opt(r.lebesgue),
                opt(r.native_norm),
                opt(r.sup_error),
                opt(r.l2_error),
                opt(r.jitter),
                r.sampling.map(|s| s.label()).unwrap_or(""),
                r.status.replace(',', ";"),
            );
        }
        out
    }
}

/// Which per-level quantities a study computes.
#[derive(Debug, Clone, Copy, Default)]
pub struct StudyOptions<'a> {
    pub lebesgue: bool,
    pub target: Option<&'a Target>,
}

/// Runs every level: factorization, optional Lebesgue constant, optional fit of the
/// target with native norm and grid errors. A failing level yields a row whose status
/// names the error; later levels still run.
pub fn study_levels(
    kernel: &Kernel,
    levels: &[DesignLevel],
    grid: &EvalGrid,
    opts: StudyOptions<'_>,
) -> Result<DiagnosticsReport> {
    check_grid(kernel, grid)?;
    if levels.windows(2).any(|w| w[0].points.len() >= w[1].points.len()) {
        return Err(Error::invalid("level sizes must be strictly increasing"));
    }
    let dom = grid.domain();
    let rows = levels
        .iter()
        .map(|lvl| {
            let g = lvl.geometry;
            let sampling = (kernel.dim() == 1)
                .then(|| sampling_condition(g.fill, kernel.sobolev_order(), dom.lower()[0], dom.upper()[0]));
            let mut row = ReportRow {
                n: g.n,
                fill: g.fill,
                separation: g.separation,
                mesh_ratio: g.mesh_ratio,
                lebesgue: None,
                native_norm: None,
                sup_error: None,
                l2_error: None,
                jitter: None,
                sampling,
                status: "ok".into(),
            };
            if let Err(e) = fill_row(kernel, &lvl.points, grid, opts, &mut row) {
                row.status = format!("failed: {e}");
            }
            row
        })
        .collect();
    Ok(DiagnosticsReport {
        metadata: Vec::new(),
        rows,
    })
}

fn fill_row(
    kernel: &Kernel,
    points: &PointSet,
    grid: &EvalGrid,
    opts: StudyOptions<'_>,
    row: &mut ReportRow,
) -> Result<()> {
    let system = InterpolationSystem::new(kernel, points)?;
    row.jitter = Some(system.factorization().jitter());
    if opts.lebesgue {
        row.lebesgue = Some(lebesgue_constant_of(&system, grid)?.value);
    }
    if let Some(target) = opts.target {
        let s = system.fit(&target.sample(points.coords(), points.dim()))?;
        let norm = s.native_norm();
        row.native_norm = Some(norm.value);
        if norm.clamped {
            row.status = "ok; native norm clamped from negative".into();
        }
        let errs = pointwise_errors(target, &s, grid)?;
        row.sup_error = Some(errs.iter().fold(0.0f64, |m, e| m.max(e.abs())));
        row.l2_error = Some(
            errs.iter()
                .zip(grid.weights())
                .map(|(e, w)| w * e * e)
                .sum::<f64>()
                .sqrt(),
        );
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub report: DiagnosticsReport,
    /// Log-log slope of sup error against `h` over the last half of the levels.
    pub sup_slope: Option<f64>,
    pub l2_slope: Option<f64>,
}

fn tail_slope(report: &DiagnosticsReport, col: impl Fn(&ReportRow) -> Option<f64>) -> Option<f64> {
    let rows: Vec<&ReportRow> = report.ok_rows().collect();
    if rows.len() < 2 {
        return None;
    }
    let tail = &rows[tail_start(rows.len(), 2)..];
    let h: Vec<f64> = tail.iter().map(|r| r.fill).collect();
    let e: Option<Vec<f64>> = tail.iter().map(|r| col(r)).collect();
    loglog_slope(&h, &e?)
}

/// Per-level errors of the interpolants of `target` with fitted convergence rates.
/// A slope is `None` (not applicable) when an error in the window vanishes.
pub fn convergence_table(
    target: &Target,
    kernel: &Kernel,
    levels: &[DesignLevel],
    grid: &EvalGrid,
    lebesgue: bool,
) -> Result<ConvergenceTable> {
    let report = study_levels(
        kernel,
        levels,
        grid,
        StudyOptions {
            lebesgue,
            target: Some(target),
        },
    )?;
    let sup_slope = tail_slope(&report, |r| r.sup_error);
    let l2_slope = tail_slope(&report, |r| r.l2_error);
    Ok(ConvergenceTable {
        report,
        sup_slope,
        l2_slope,
    })
}
