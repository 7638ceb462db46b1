//! Experiment execution and file emission.
//!
//! [`execute`] computes every output in memory; [`write_outputs`] places them next to
//! the configured path prefix as `<prefix>_<name>`.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use kinterp::diagnostics::{
    classify_growth, convergence_table, decay_profile, study_levels, DesignLevel, DiagnosticsReport, ReportRow,
    StudyOptions,
};
use kinterp::geometry::{
    dyadic_sequence, equispaced, generate_candidates, geometric_greedy, nearest_index, CandidateScheme,
};
use kinterp::{EvalGrid, InterpolationSystem, PointSet, Target};

use crate::config::{DesignScheme, ExperimentConfig, ExperimentKind, RESULT_PREFIX};
use crate::svg::{emit_svg, AxesSpec, Axis, Scale, Series};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("cannot build the design: {0}")]
    Design(kinterp::Error),
    #[error("{0}")]
    Numerics(kinterp::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    /// File name suffix, e.g. `report.csv`.
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub files: Vec<OutputFile>,
    pub levels: usize,
    pub failed_levels: usize,
    /// Non-fatal problems, such as a chart that could not be drawn.
    pub warnings: Vec<String>,
}

impl Outputs {
    pub fn all_failed(&self) -> bool {
        self.levels > 0 && self.failed_levels == self.levels
    }

    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|f| f.name == name).map(|f| f.contents.as_str())
    }
}

/// `<prefix>_<name>`, or `<prefix>.svg` for the chart.
pub fn output_path(cfg: &ExperimentConfig, name: &str) -> PathBuf {
    if name == "svg" {
        PathBuf::from(format!("{}.svg", cfg.output))
    } else {
        PathBuf::from(format!("{}_{}", cfg.output, name))
    }
}

fn center(cfg: &ExperimentConfig) -> Vec<f64> {
    cfg.domain
        .lower()
        .iter()
        .zip(cfg.domain.upper())
        .map(|(a, b)| 0.5 * (a + b))
        .collect()
}

/// Point sets of every design level.
pub fn build_levels(cfg: &ExperimentConfig) -> kinterp::Result<Vec<PointSet>> {
    let dom = &cfg.domain;
    let levels = &cfg.design.levels;
    let last = *levels.last().expect("validated levels");
    let (a, b) = (dom.lower()[0], dom.upper()[0]);
    let master = match &cfg.design.scheme {
        DesignScheme::Equispaced => {
            return levels.iter().map(|&n| equispaced(a, b, n)).collect();
        }
        DesignScheme::Greedy { candidates, pool } => {
            let cands = generate_candidates(dom, *pool, *candidates)?;
            let start = nearest_index(&cands, &center(cfg)).expect("non-empty pool");
            geometric_greedy(&cands, last, start)?
        }
        DesignScheme::Dyadic => dyadic_sequence(a, b, last)?,
        DesignScheme::LowDiscrepancy => generate_candidates(dom, last, CandidateScheme::LowDiscrepancy)?,
        DesignScheme::Uniform { seed } => {
            generate_candidates(dom, last, CandidateScheme::UniformRandom { seed: *seed })?
        }
        DesignScheme::Explicit { points } => PointSet::new(dom.clone(), points.clone())?,
    };
    Ok(levels.iter().map(|&n| master.prefix(n)).collect())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_else(|| "\"n/a\"".into())
}

fn metadata_block(cfg: &ExperimentConfig, results: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in cfg.metadata() {
        let _ = writeln!(out, "# {k} = {v}");
    }
    for (k, v) in results {
        let _ = writeln!(out, "# {RESULT_PREFIX}{k} = {v}");
    }
    out
}

fn design_csv(cfg: &ExperimentConfig, levels: &[PointSet]) -> String {
    let dim = cfg.kernel.dim();
    let mut out = metadata_block(cfg, &[]);
    out.push_str("index");
    for d in 1..=dim {
        let _ = write!(out, ",x{d}");
    }
    out.push_str(",level_marker\n");
    let row = |out: &mut String, i: usize, p: &[f64], marker: usize| {
        let _ = write!(out, "{i}");
        for c in p {
            let _ = write!(out, ",{c:?}");
        }
        let _ = writeln!(out, ",{marker}");
    };
    if cfg.design.scheme.is_nested() {
        // each point of the largest level, marked with the first level containing it
        let master = levels.last().expect("validated levels");
        let mut marker = 0;
        for (i, p) in master.iter().enumerate() {
            while levels[marker].len() <= i {
                marker += 1;
            }
            row(&mut out, i, p, marker);
        }
    } else {
        for (marker, lvl) in levels.iter().enumerate() {
            for (i, p) in lvl.iter().enumerate() {
                row(&mut out, i, p, marker);
            }
        }
    }
    out
}

fn report_file(cfg: &ExperimentConfig, report: &DiagnosticsReport, results: &[(String, String)]) -> OutputFile {
    let mut r = report.clone();
    r.metadata = cfg.metadata();
    r.metadata
        .extend(results.iter().map(|(k, v)| (format!("{RESULT_PREFIX}{k}"), v.clone())));
    OutputFile {
        name: "report.csv".into(),
        contents: r.to_csv(),
    }
}

fn series_from(
    rows: &[ReportRow],
    x: impl Fn(&ReportRow) -> f64,
    y: impl Fn(&ReportRow) -> Option<f64>,
    label: &str,
) -> Series {
    Series {
        label: label.into(),
        points: rows
            .iter()
            .filter(|r| r.is_ok())
            .filter_map(|r| y(r).map(|v| (x(r), v)))
            .collect(),
    }
}

fn chart(outputs: &mut Outputs, series: &[Series], axes: &AxesSpec) {
    if series.iter().all(|s| s.points.is_empty()) {
        outputs.warnings.push("chart skipped: no successful levels".into());
        return;
    }
    let series: Vec<Series> = series.iter().filter(|s| !s.points.is_empty()).cloned().collect();
    match emit_svg(&series, axes) {
        Ok(svg) => outputs.files.push(OutputFile {
            name: "svg".into(),
            contents: svg,
        }),
        Err(e) => outputs.warnings.push(format!("chart skipped: {e}")),
    }
}

fn measure(cfg: &ExperimentConfig, levels: Vec<PointSet>) -> Result<Vec<DesignLevel>, RunError> {
    levels
        .into_iter()
        .map(|p| DesignLevel::measure(p, cfg.design.fill))
        .collect::<kinterp::Result<_>>()
        .map_err(RunError::Design)
}

/// Runs the experiment and returns the emitted files without touching the disk.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outputs, RunError> {
    let points = build_levels(cfg).map_err(RunError::Design)?;
    let grid = EvalGrid::new(cfg.domain.clone(), cfg.grid_points).map_err(RunError::Design)?;
    let target = cfg.build_target();
    let mut outputs = Outputs {
        files: vec![OutputFile {
            name: "design.csv".into(),
            contents: design_csv(cfg, &points),
        }],
        levels: points.len(),
        failed_levels: 0,
        warnings: Vec::new(),
    };
    let kernel = &cfg.kernel;
    let kernel_label = kernel.to_string();
    match cfg.kind {
        ExperimentKind::InterpOnce => {
            interp_once(
                cfg,
                &points[0],
                target.as_ref().expect("validated target"),
                &grid,
                &mut outputs,
            );
        }
        ExperimentKind::LebesgueTrace => {
            let levels = measure(cfg, points)?;
            let opts = StudyOptions {
                lebesgue: true,
                target: target.as_ref(),
            };
            let report = study_levels(kernel, &levels, &grid, opts).map_err(RunError::Numerics)?;
            let max = report
                .ok_rows()
                .filter_map(|r| r.lebesgue)
                .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
            outputs.failed_levels = report.rows.len() - report.ok_rows().count();
            outputs
                .files
                .push(report_file(cfg, &report, &[("max_lambda".into(), fmt_opt(max))]));
            if cfg.svg {
                let s = series_from(&report.rows, |r| r.n as f64, |r| r.lebesgue, &kernel_label);
                let axes = AxesSpec {
                    title: "Lebesgue constant".into(),
                    x: Axis::new("n", Scale::Log),
                    y: Axis::new("Lebesgue constant", Scale::Linear),
                };
                chart(&mut outputs, &[s], &axes);
            }
        }
        ExperimentKind::Convergence => {
            let levels = measure(cfg, points)?;
            let t = target.as_ref().expect("validated target");
            let table = convergence_table(t, kernel, &levels, &grid, cfg.lebesgue).map_err(RunError::Numerics)?;
            let report = &table.report;
            outputs.failed_levels = report.rows.len() - report.ok_rows().count();
            let results = [
                ("sup_slope".to_string(), fmt_opt(table.sup_slope)),
                ("l2_slope".to_string(), fmt_opt(table.l2_slope)),
            ];
            outputs.files.push(report_file(cfg, report, &results));
            if cfg.svg {
                let sup = series_from(&report.rows, |r| r.fill, |r| r.sup_error, "sup error");
                let l2 = series_from(&report.rows, |r| r.fill, |r| r.l2_error, "L2 error");
                let axes = AxesSpec {
                    title: format!("Errors for {t}"),
                    x: Axis::new("fill distance h", Scale::Log),
                    y: Axis::new("error", Scale::Log),
                };
                chart(&mut outputs, &[sup, l2], &axes);
            }
        }
        ExperimentKind::NormGrowth => {
            let levels = measure(cfg, points)?;
            let t = target.as_ref().expect("validated target");
            let opts = StudyOptions {
                lebesgue: cfg.lebesgue,
                target: Some(t),
            };
            let mut report = study_levels(kernel, &levels, &grid, opts).map_err(RunError::Numerics)?;
            let mut results = Vec::new();
            // the sequence stops at the first failing level
            if let Some(i) = report.rows.iter().position(|r| !r.is_ok()) {
                results.push(("failed_level".to_string(), report.rows[i].n.to_string()));
                outputs.failed_levels = outputs.levels - i;
                report.rows.truncate(i + 1);
            }
            let entries: Vec<(usize, f64)> = report
                .ok_rows()
                .filter_map(|r| r.native_norm.map(|v| (r.n, v)))
                .collect();
            let (label, slope, variation) = classify_growth(&entries);
            results.insert(0, ("classification".into(), format!("{:?}", label.label())));
            results.insert(1, ("slope".into(), fmt_opt(slope)));
            results.insert(2, ("last_quarter_variation".into(), fmt_opt(variation)));
            outputs.files.push(report_file(cfg, &report, &results));
            if cfg.svg {
                let s = series_from(&report.rows, |r| r.n as f64, |r| r.native_norm, "native norm");
                let axes = AxesSpec {
                    title: format!("Native norms of interpolants of {t}"),
                    x: Axis::new("n", Scale::Log),
                    y: Axis::new("native norm", Scale::Log),
                };
                chart(&mut outputs, &[s], &axes);
            }
        }
        ExperimentKind::Decay => {
            let levels = measure(cfg, points)?;
            let opts = StudyOptions {
                lebesgue: cfg.lebesgue,
                target: None,
            };
            let report = study_levels(kernel, &levels, &grid, opts).map_err(RunError::Numerics)?;
            let mid = center(cfg);
            let mut csv = String::from("n,node_index,node,h,nu_hat,c_hat,r2,envelope,points_used,status\n");
            let mut rates = Vec::new();
            let mut failed = 0;
            for lvl in &levels {
                let pts = &lvl.points;
                let i = cfg
                    .decay_node
                    .unwrap_or_else(|| nearest_index(pts, &mid).expect("non-empty level"));
                let h = lvl.geometry.fill;
                let _ = write!(csv, "{},{i},{:?},{h:?},", pts.len(), pts.point(i)[0]);
                match decay_profile(kernel, pts, i, &grid, h) {
                    Ok(f) => {
                        rates.push((pts.len(), f.rate));
                        let _ = writeln!(
                            csv,
                            "{:?},{:?},{:?},{:?},{},ok",
                            f.rate, f.prefactor, f.r2, f.envelope, f.points_used
                        );
                    }
                    Err(e) => {
                        failed += 1;
                        let _ = writeln!(csv, ",,,,,failed: {}", e.to_string().replace(',', ";"));
                    }
                }
            }
            outputs.failed_levels = failed;
            let ratio = (!rates.is_empty()).then(|| {
                let hi = rates.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
                let lo = rates.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
                hi / lo
            });
            let results = [("nu_hat_ratio".to_string(), fmt_opt(ratio))];
            outputs.files.push(report_file(cfg, &report, &[]));
            outputs.files.push(OutputFile {
                name: "decay.csv".into(),
                contents: metadata_block(cfg, &results) + &csv,
            });
            if cfg.svg {
                let s = Series {
                    label: kernel_label,
                    points: rates.iter().map(|&(n, r)| (n as f64, r)).collect(),
                };
                let axes = AxesSpec {
                    title: "Fitted Lagrange decay rate".into(),
                    x: Axis::new("n", Scale::Log),
                    y: Axis::new("decay rate", Scale::Linear),
                };
                chart(&mut outputs, &[s], &axes);
            }
        }
    }
    Ok(outputs)
}

fn interp_once(cfg: &ExperimentConfig, points: &PointSet, target: &Target, grid: &EvalGrid, outputs: &mut Outputs) {
    let data = target.sample(points.coords(), points.dim());
    let fitted = InterpolationSystem::new(&cfg.kernel, points).and_then(|sys| sys.fit(&data));
    let s = match fitted {
        Ok(s) => s,
        Err(e) => {
            outputs.failed_levels = 1;
            let results = [("status".to_string(), format!("{:?}", format!("failed: {e}")))];
            outputs.files.push(OutputFile {
                name: "interpolant.csv".into(),
                contents: metadata_block(cfg, &results),
            });
            return;
        }
    };
    let values = s.evaluate(grid.coords()).expect("grid inside the kernel domain");
    let errs: Vec<f64> = grid.iter().zip(&values).map(|(p, v)| target.eval(p) - v).collect();
    let sup = errs.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let l2 = errs
        .iter()
        .zip(grid.weights())
        .map(|(e, w)| w * e * e)
        .sum::<f64>()
        .sqrt();
    let norm = s.native_norm();
    let results = [
        ("n".to_string(), points.len().to_string()),
        ("jitter".into(), format!("{:?}", s.jitter())),
        ("residual".into(), format!("{:?}", s.residual())),
        ("native_norm".into(), format!("{:?}", norm.value)),
        ("native_norm_clamped".into(), norm.clamped.to_string()),
        ("sup_error".into(), format!("{sup:?}")),
        ("l2_error".into(), format!("{l2:?}")),
    ];
    outputs.files.push(OutputFile {
        name: "interpolant.csv".into(),
        contents: metadata_block(cfg, &results) + &s.to_csv(),
    });
    if cfg.svg {
        let stride = grid.len().div_ceil(1025).max(1);
        let curve = |f: &dyn Fn(usize, &[f64]) -> f64| -> Vec<(f64, f64)> {
            grid.iter()
                .enumerate()
                .step_by(stride)
                .map(|(i, p)| (p[0], f(i, p)))
                .collect()
        };
        let series = [
            Series {
                label: "interpolant".into(),
                points: curve(&|i, _| values[i]),
            },
            Series {
                label: target.name().into(),
                points: curve(&|_, p| target.eval(p)),
            },
        ];
        let axes = AxesSpec {
            title: format!("Interpolant of {target} with {} nodes", points.len()),
            x: Axis::new("x", Scale::Linear),
            y: Axis::new("value", Scale::Linear),
        };
        chart(outputs, &series, &axes);
    }
}

/// Writes every output file, creating parent directories as needed.
pub fn write_outputs(cfg: &ExperimentConfig, outputs: &Outputs) -> Result<Vec<PathBuf>, RunError> {
    let mut written = Vec::new();
    for f in &outputs.files {
        let path = output_path(cfg, &f.name);
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|source| RunError::Io {
                path: dir.to_path_buf(),
                source,
            })?;
        }
        fs::write(&path, &f.contents).map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })?;
        written.push(path);
    }
    Ok(written)
}

/// Executes and writes, returning the outputs and the written paths.
pub fn run(cfg: &ExperimentConfig) -> Result<(Outputs, Vec<PathBuf>), RunError> {
    let outputs = execute(cfg)?;
    let paths = write_outputs(cfg, &outputs)?;
    Ok((outputs, paths))
}
