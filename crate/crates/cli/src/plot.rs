//! Charts drawn from emitted report CSVs.
//!
//! A plot spec is a small TOML document, given as a file or inline (`;` separates
//! lines):
//!
//! ```toml
//! x = "n"
//! y = ["lambda"]
//! x_scale = "log"      # linear | log
//! y_scale = "linear"
//! title = "Lebesgue constant"
//! labels = ["Matern 3/2", "Gaussian"]   # one per series, optional
//! output = "lebesgue.svg"                   # default: first CSV with .svg extension
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::config::ConfigError;
use crate::svg::{emit_svg, AxesSpec, Axis, Scale, Series, SvgError};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotSpec {
    pub x: String,
    pub y: Vec<String>,
    #[serde(default = "linear")]
    pub x_scale: String,
    #[serde(default = "linear")]
    pub y_scale: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn linear() -> String {
    "linear".into()
}

#[derive(Debug, thiserror::Error)]
pub enum PlotError {
    #[error("plot spec: {0}")]
    Spec(ConfigError),
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error(transparent)]
    Svg(#[from] SvgError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl PlotSpec {
    /// Reads a spec file, or parses the argument itself when no such file exists.
    pub fn load(arg: &str) -> Result<Self, PlotError> {
        let path = Path::new(arg);
        let text = if path.is_file() {
            std::fs::read_to_string(path).map_err(|source| PlotError::Io {
                path: path.to_path_buf(),
                source,
            })?
        } else {
            arg.replace(';', "\n")
        };
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, PlotError> {
        let spec: PlotSpec = toml::from_str(text).map_err(|e| {
            PlotError::Spec(ConfigError {
                line: e.span().map(|s| text[..s.start].matches('\n').count() + 1),
                field: None,
                message: e.message().trim().to_string(),
            })
        })?;
        let bad = |field: &str, message: String| {
            PlotError::Spec(ConfigError {
                line: None,
                field: Some(field.into()),
                message,
            })
        };
        spec.x_scale.parse::<Scale>().map_err(|m| bad("x_scale", m))?;
        spec.y_scale.parse::<Scale>().map_err(|m| bad("y_scale", m))?;
        if spec.y.is_empty() {
            return Err(bad("y", "needs at least one column".into()));
        }
        Ok(spec)
    }

    fn axes(&self) -> AxesSpec {
        AxesSpec {
            title: self.title.clone(),
            x: Axis::new(&self.x, self.x_scale.parse().expect("validated scale")),
            y: Axis::new(self.y.join(", "), self.y_scale.parse().expect("validated scale")),
        }
    }
}

/// `(x, y)` pairs of two named columns; rows with an empty or non-numeric cell are skipped.
pub fn read_columns(path: &Path, text: &str, x: &str, y: &str) -> Result<Vec<(f64, f64)>, PlotError> {
    let err = |message: String| PlotError::Csv {
        path: path.to_path_buf(),
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| err(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| err(format!("no column named `{name}`")))
    };
    let (ix, iy) = (col(x)?, col(y)?);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let parse = |i: usize| rec.get(i).and_then(|c| c.trim().parse::<f64>().ok());
        if let (Some(a), Some(b)) = (parse(ix), parse(iy)) {
            out.push((a, b));
        }
    }
    Ok(out)
}

/// Builds one series per (CSV, y column) pair.
pub fn collect_series(csvs: &[PathBuf], spec: &PlotSpec) -> Result<Vec<Series>, PlotError> {
    let mut series = Vec::new();
    for path in csvs {
        let text = std::fs::read_to_string(path).map_err(|source| PlotError::Io {
            path: path.clone(),
            source,
        })?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        for y in &spec.y {
            let label = match (csvs.len() > 1, spec.y.len() > 1) {
                (true, true) => format!("{stem}: {y}"),
                (true, false) => stem.clone(),
                _ => y.clone(),
            };
            series.push(Series {
                label,
                points: read_columns(path, &text, &spec.x, y)?,
            });
        }
    }
    if let Some(labels) = &spec.labels {
        for (s, l) in series.iter_mut().zip(labels) {
            s.label = l.clone();
        }
    }
    Ok(series)
}

/// Draws the chart and writes it, returning the SVG path.
pub fn plot(csvs: &[PathBuf], spec: &PlotSpec) -> Result<PathBuf, PlotError> {
    let series = collect_series(csvs, spec)?;
    let svg = emit_svg(&series, &spec.axes())?;
    let out = spec.output.clone().unwrap_or_else(|| csvs[0].with_extension("svg"));
    std::fs::write(&out, svg).map_err(|source| PlotError::Io {
        path: out.clone(),
        source,
    })?;
    Ok(out)
}
