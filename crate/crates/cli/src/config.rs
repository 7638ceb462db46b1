//! Experiment configuration.
//!
//! A config is a TOML file made of flat sections:
//!
//! ```toml
//! [experiment]
//! kind = "lebesgue_trace"   # lebesgue_trace | convergence | norm_growth | decay | interp_once
//! output = "out/lebesgue"       # path prefix of every emitted file
//! svg = true
//!
//! [kernel]
//! family = "matern32"       # matern12 | matern32 | matern52 | gaussian | w21
//! gamma = 10.0
//! dim = 2
//!
//! [design]
//! scheme = "greedy"         # greedy | dyadic | low_discrepancy | uniform | equispaced | explicit
//! levels = [25, 50, 100, 200, 400]
//!
//! [grid]
//! points_per_axis = 513
//! ```
//!
//! Optional sections are `[domain]` (`lower`, `upper`; unit box by default),
//! `[target]` (`name` plus the parameters of that target) and `[decay]` (`node`).
//! [`ExperimentConfig::to_toml`] writes the canonical form, which parses back to an
//! equal config.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use kinterp::geometry::{BoxDomain, CandidateScheme, FillMethod, DEFAULT_PROBE_PER_AXIS};
use kinterp::{Family, Kernel, Target};
use serde::{Deserialize, Serialize};

/// Smallest accepted evaluation grid density.
pub const MIN_GRID_POINTS: usize = 33;
/// Candidate pool size of greedy designs when none is given.
pub const DEFAULT_POOL: usize = 10_000;

/// A config problem, located by line and field where possible.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = self.line {
            write!(f, "line {l}: ")?;
        }
        if let Some(field) = &self.field {
            write!(f, "{field}: ")?;
        }
        f.write_str(&self.message)
    }
}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        ConfigError {
            line: None,
            field: None,
            message: message.into(),
        }
    }

    fn from_toml(err: &toml::de::Error, text: &str) -> Self {
        let line = err.span().map(|s| line_of(text, s.start));
        ConfigError {
            line,
            field: None,
            message: err.message().trim().to_string(),
        }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of `key` inside `[section]`, or of the dotted key `section.key`.
fn field_line(text: &str, section: &str, key: &str) -> Option<usize> {
    let dotted = format!("{section}.{key}");
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            continue;
        }
        if let Some((k, _)) = line.split_once('=') {
            let k = k.trim();
            if (current == section && k == key) || (current.is_empty() && k == dotted) {
                return Some(i + 1);
            }
        }
    }
    None
}

fn kinterp_message(e: kinterp::Error) -> String {
    match e {
        kinterp::Error::InvalidArgument(m) => m,
        other => other.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    LebesgueTrace,
    Convergence,
    NormGrowth,
    Decay,
    InterpOnce,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::LebesgueTrace,
        ExperimentKind::Convergence,
        ExperimentKind::NormGrowth,
        ExperimentKind::Decay,
        ExperimentKind::InterpOnce,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::LebesgueTrace => "lebesgue_trace",
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::NormGrowth => "norm_growth",
            ExperimentKind::Decay => "decay",
            ExperimentKind::InterpOnce => "interp_once",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            format!(
                "unknown experiment `{s}` (expected lebesgue_trace, convergence, norm_growth, decay or interp_once)"
            )
        })
    }
}

/// How the design levels are generated.
#[derive(Debug, Clone, PartialEq)]
pub enum DesignScheme {
    /// Geometric greedy selection from a candidate pool, started at the candidate
    /// nearest the domain center.
    Greedy { candidates: CandidateScheme, pool: usize },
    /// Base-2 van der Corput order on an interval; levels of size `2^k − 1` are equispaced.
    Dyadic,
    /// Halton sequence prefixes.
    LowDiscrepancy,
    /// Seeded uniform random prefixes.
    Uniform { seed: u64 },
    /// Interior equispaced nodes, generated separately per level.
    Equispaced,
    /// Prefixes of an explicit point list (flat, row-major).
    Explicit { points: Vec<f64> },
}

impl DesignScheme {
    pub fn name(&self) -> &'static str {
        match self {
            DesignScheme::Greedy { .. } => "greedy",
            DesignScheme::Dyadic => "dyadic",
            DesignScheme::LowDiscrepancy => "low_discrepancy",
            DesignScheme::Uniform { .. } => "uniform",
            DesignScheme::Equispaced => "equispaced",
            DesignScheme::Explicit { .. } => "explicit",
        }
    }

    /// Whether every level is a prefix of the next.
    pub fn is_nested(&self) -> bool {
        !matches!(self, DesignScheme::Equispaced)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignSpec {
    pub scheme: DesignScheme,
    pub levels: Vec<usize>,
    pub fill: FillMethod,
}

/// A named target with its parameters. Kernel translates use the experiment kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetSpec {
    Zero,
    Constant { value: f64 },
    KernelTranslates { centers: Vec<f64>, weights: Vec<f64> },
    AbsPower { center: Vec<f64>, exponent: f64 },
    SmoothStep { center: f64, width: f64 },
    Trig { frequency: f64 },
}

impl TargetSpec {
    pub fn build(&self, kernel: &Kernel) -> kinterp::Result<Target> {
        Ok(match self {
            TargetSpec::Zero => Target::Zero,
            TargetSpec::Constant { value } => Target::Constant(*value),
            TargetSpec::KernelTranslates { centers, weights } => {
                let pts = centers.chunks(kernel.dim()).map(|c| c.to_vec()).collect();
                Target::translates(kernel, pts, weights.clone())?
            }
            TargetSpec::AbsPower { center, exponent } => Target::AbsPower {
                center: center.clone(),
                exponent: *exponent,
            },
            TargetSpec::SmoothStep { center, width } => Target::SmoothStep {
                center: *center,
                width: *width,
            },
            TargetSpec::Trig { frequency } => Target::Trig { frequency: *frequency },
        })
    }
}

/// A fully validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub output: String,
    pub svg: bool,
    /// Compute the Lebesgue constant of every level.
    pub lebesgue: bool,
    pub kernel: Kernel,
    pub domain: BoxDomain,
    pub design: DesignSpec,
    pub grid_points: usize,
    pub target: Option<TargetSpec>,
    /// Node whose Lagrange function a decay study fits; the most central node if `None`.
    pub decay_node: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Numbers {
    One(f64),
    Many(Vec<f64>),
}

impl Numbers {
    fn into_vec(self) -> Vec<f64> {
        match self {
            Numbers::One(v) => vec![v],
            Numbers::Many(v) => v,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: RawExperiment,
    kernel: RawKernel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain: Option<RawDomain>,
    design: RawDesign,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid: Option<RawGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target: Option<RawTarget>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    decay: Option<RawDecay>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    kind: String,
    output: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    svg: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lebesgue: Option<bool>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKernel {
    family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    interval: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDesign {
    scheme: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    levels: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    candidates: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pool: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    points: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fill: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    probe_points: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    points_per_axis: usize,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTarget {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    centers: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    center: Option<Numbers>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frequency: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDecay {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    node: Option<usize>,
}

/// Validation context: the source text for line lookups.
struct Ctx<'a> {
    text: &'a str,
}

impl Ctx<'_> {
    fn err(&self, section: &str, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            line: field_line(self.text, section, key),
            field: Some(format!("{section}.{key}")),
            message: message.into(),
        }
    }

    fn unused<T>(&self, value: &Option<T>, section: &str, key: &str, context: &str) -> Result<(), ConfigError> {
        match value {
            Some(_) => Err(self.err(section, key, format!("not used {context}"))),
            None => Ok(()),
        }
    }

    fn required<T: Clone>(&self, value: &Option<T>, section: &str, key: &str, context: &str) -> Result<T, ConfigError> {
        value
            .clone()
            .ok_or_else(|| self.err(section, key, format!("required {context}")))
    }
}

/// Default evaluation grid density for a dimension.
pub fn default_grid_points(dim: usize) -> usize {
    match dim {
        1 => 4097,
        2 => 513,
        _ => 65,
    }
}

fn parse_fill(ctx: &Ctx, raw: &RawDesign) -> Result<FillMethod, ConfigError> {
    let probe = raw.probe_points.unwrap_or(DEFAULT_PROBE_PER_AXIS);
    if probe < 2 {
        return Err(ctx.err("design", "probe_points", "needs at least 2 points per axis"));
    }
    match raw.fill.as_deref().unwrap_or("auto") {
        "auto" => Ok(FillMethod::Auto(probe)),
        "probe" => Ok(FillMethod::Probe(probe)),
        "exact" => {
            ctx.unused(&raw.probe_points, "design", "probe_points", "with fill = \"exact\"")?;
            Ok(FillMethod::Exact)
        }
        other => Err(ctx.err(
            "design",
            "fill",
            format!("unknown fill method `{other}` (expected auto, probe or exact)"),
        )),
    }
}

fn parse_scheme(ctx: &Ctx, raw: &RawDesign) -> Result<DesignScheme, ConfigError> {
    let name = raw.scheme.as_str();
    let ctx_name = format!("by scheme `{name}`");
    if name != "greedy" {
        ctx.unused(&raw.candidates, "design", "candidates", &ctx_name)?;
        ctx.unused(&raw.pool, "design", "pool", &ctx_name)?;
    }
    if name != "explicit" {
        ctx.unused(&raw.points, "design", "points", &ctx_name)?;
    }
    match name {
        "greedy" => {
            let mut candidates: CandidateScheme = raw
                .candidates
                .as_deref()
                .unwrap_or("low_discrepancy")
                .parse()
                .map_err(|e| ctx.err("design", "candidates", kinterp_message(e)))?;
            if let CandidateScheme::UniformRandom { seed } = &mut candidates {
                *seed = raw.seed.unwrap_or(0);
            } else {
                ctx.unused(&raw.seed, "design", "seed", "by deterministic candidates")?;
            }
            let pool = raw.pool.unwrap_or(DEFAULT_POOL);
            if pool == 0 {
                return Err(ctx.err("design", "pool", "must be positive"));
            }
            Ok(DesignScheme::Greedy { candidates, pool })
        }
        "uniform" => Ok(DesignScheme::Uniform {
            seed: raw.seed.unwrap_or(0),
        }),
        other => {
            ctx.unused(&raw.seed, "design", "seed", &ctx_name)?;
            match other {
                "dyadic" => Ok(DesignScheme::Dyadic),
                "low_discrepancy" => Ok(DesignScheme::LowDiscrepancy),
                "equispaced" => Ok(DesignScheme::Equispaced),
                "explicit" => Ok(DesignScheme::Explicit {
                    points: ctx.required(&raw.points, "design", "points", "by scheme `explicit`")?,
                }),
                _ => Err(ctx.err(
                    "design",
                    "scheme",
                    format!(
                        "unknown design scheme `{other}` (expected greedy, dyadic, low_discrepancy, uniform, equispaced or explicit)"
                    ),
                )),
            }
        }
    }
}

fn parse_target(ctx: &Ctx, raw: &RawTarget, dim: usize) -> Result<TargetSpec, ConfigError> {
    let name = raw.name.as_str();
    let by = format!("by target `{name}`");
    let allowed: &[&str] = match name {
        "zero" => &[],
        "constant" => &["value"],
        "kernel_translates" => &["centers", "weights"],
        "abs_power" => &["center", "exponent"],
        "smooth_step" => &["center", "width"],
        "trig" => &["frequency"],
        _ => return Err(ctx.err(
            "target",
            "name",
            format!(
                "unknown target `{name}` (expected zero, constant, kernel_translates, abs_power, smooth_step or trig)"
            ),
        )),
    };
    let present = [
        ("value", raw.value.is_some()),
        ("centers", raw.centers.is_some()),
        ("weights", raw.weights.is_some()),
        ("center", raw.center.is_some()),
        ("exponent", raw.exponent.is_some()),
        ("width", raw.width.is_some()),
        ("frequency", raw.frequency.is_some()),
    ];
    if let Some((key, _)) = present.iter().find(|(k, p)| *p && !allowed.contains(k)) {
        return Err(ctx.err("target", key, format!("not used {by}")));
    }
    let finite = |key: &str, v: f64| -> Result<f64, ConfigError> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ctx.err("target", key, "must be finite"))
        }
    };
    Ok(match name {
        "zero" => TargetSpec::Zero,
        "constant" => TargetSpec::Constant {
            value: finite("value", ctx.required(&raw.value, "target", "value", &by)?)?,
        },
        "kernel_translates" => {
            let centers = ctx.required(&raw.centers, "target", "centers", &by)?;
            let weights = ctx.required(&raw.weights, "target", "weights", &by)?;
            if centers.is_empty() || centers.len() % dim != 0 {
                return Err(ctx.err(
                    "target",
                    "centers",
                    format!("needs a positive multiple of {dim} coordinates, got {}", centers.len()),
                ));
            }
            if centers.len() / dim != weights.len() {
                return Err(ctx.err(
                    "target",
                    "weights",
                    format!("{} weights for {} centers", weights.len(), centers.len() / dim),
                ));
            }
            TargetSpec::KernelTranslates { centers, weights }
        }
        "abs_power" => {
            let center = ctx.required(&raw.center, "target", "center", &by)?.into_vec();
            if center.len() != dim {
                return Err(ctx.err(
                    "target",
                    "center",
                    format!("needs {dim} coordinates, got {}", center.len()),
                ));
            }
            let exponent = finite("exponent", ctx.required(&raw.exponent, "target", "exponent", &by)?)?;
            if exponent <= 0.0 {
                return Err(ctx.err("target", "exponent", "must be positive"));
            }
            TargetSpec::AbsPower { center, exponent }
        }
        "smooth_step" => {
            let center = match ctx.required(&raw.center, "target", "center", &by)? {
                Numbers::One(c) => c,
                Numbers::Many(v) if v.len() == 1 => v[0],
                Numbers::Many(_) => return Err(ctx.err("target", "center", "must be a single number")),
            };
            let width = finite("width", ctx.required(&raw.width, "target", "width", &by)?)?;
            if width <= 0.0 {
                return Err(ctx.err("target", "width", "must be positive"));
            }
            TargetSpec::SmoothStep {
                center: finite("center", center)?,
                width,
            }
        }
        _ => TargetSpec::Trig {
            frequency: finite("frequency", ctx.required(&raw.frequency, "target", "frequency", &by)?)?,
        },
    })
}

fn validate(raw: RawConfig, text: &str) -> Result<ExperimentConfig, ConfigError> {
    let ctx = Ctx { text };
    let kind: ExperimentKind = raw
        .experiment
        .kind
        .parse()
        .map_err(|m: String| ctx.err("experiment", "kind", m))?;
    if raw.experiment.output.trim().is_empty() {
        return Err(ctx.err("experiment", "output", "must not be empty"));
    }

    // domain first: the interval kernel defaults to it
    let dim = raw.kernel.dim;
    if dim == 0 {
        return Err(ctx.err("kernel", "dim", "must be at least 1"));
    }
    let domain = match &raw.domain {
        None => BoxDomain::unit(dim),
        Some(d) => {
            if d.lower.len() != dim {
                return Err(ctx.err(
                    "domain",
                    "lower",
                    format!("needs {dim} coordinates, got {}", d.lower.len()),
                ));
            }
            if d.upper.len() != dim {
                return Err(ctx.err(
                    "domain",
                    "upper",
                    format!("needs {dim} coordinates, got {}", d.upper.len()),
                ));
            }
            BoxDomain::new(d.lower.clone(), d.upper.clone())
                .map_err(|e| ctx.err("domain", "upper", kinterp_message(e)))?
        }
    };

    let family: Family = raw
        .kernel
        .family
        .parse()
        .map_err(|e| ctx.err("kernel", "family", kinterp_message(e)))?;
    let kernel = if family == Family::IntervalSobolevW21 {
        ctx.unused(&raw.kernel.gamma, "kernel", "gamma", "by family `w21`")?;
        if dim != 1 {
            return Err(ctx.err("kernel", "dim", "family `w21` is defined on intervals only"));
        }
        let (a, b) = match &raw.kernel.interval {
            None => (domain.lower()[0], domain.upper()[0]),
            Some(v) if v.len() == 2 => (v[0], v[1]),
            Some(v) => return Err(ctx.err("kernel", "interval", format!("needs 2 endpoints, got {}", v.len()))),
        };
        if a > domain.lower()[0] || b < domain.upper()[0] {
            return Err(ctx.err("kernel", "interval", "must contain the domain"));
        }
        Kernel::interval_sobolev(a, b).map_err(|e| ctx.err("kernel", "interval", kinterp_message(e)))?
    } else {
        ctx.unused(
            &raw.kernel.interval,
            "kernel",
            "interval",
            &format!("by family `{family}`"),
        )?;
        let gamma = ctx.required(&raw.kernel.gamma, "kernel", "gamma", &format!("by family `{family}`"))?;
        Kernel::new(family, gamma, dim).map_err(|e| ctx.err("kernel", "gamma", kinterp_message(e)))?
    };

    let scheme = parse_scheme(&ctx, &raw.design)?;
    if matches!(scheme, DesignScheme::Dyadic | DesignScheme::Equispaced) && dim != 1 {
        return Err(ctx.err(
            "design",
            "scheme",
            format!("scheme `{}` is defined on intervals only", scheme.name()),
        ));
    }
    let levels = match (&scheme, &raw.design.levels) {
        (_, Some(l)) => l.clone(),
        (DesignScheme::Explicit { points }, None) => vec![points.len() / dim],
        (_, None) => return Err(ctx.err("design", "levels", "required")),
    };
    if let DesignScheme::Explicit { points } = &scheme {
        if points.is_empty() || points.len() % dim != 0 {
            return Err(ctx.err(
                "design",
                "points",
                format!("needs a positive multiple of {dim} coordinates, got {}", points.len()),
            ));
        }
        if levels.last().is_some_and(|&n| n > points.len() / dim) {
            return Err(ctx.err(
                "design",
                "levels",
                format!("exceed the {} explicit points", points.len() / dim),
            ));
        }
    }
    if levels.is_empty() {
        return Err(ctx.err("design", "levels", "needs at least one level"));
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ctx.err("design", "levels", "must be strictly increasing"));
    }
    if kind == ExperimentKind::InterpOnce {
        if levels.len() != 1 || levels[0] == 0 {
            return Err(ctx.err("design", "levels", "interp_once needs exactly one positive level"));
        }
    } else if levels[0] < 2 {
        return Err(ctx.err("design", "levels", "every level needs at least 2 points"));
    }
    if let DesignScheme::Greedy { pool, .. } = &scheme {
        if levels.last().is_some_and(|n| n > pool) {
            return Err(ctx.err(
                "design",
                "pool",
                format!("{pool} candidates cannot supply {} points", levels.last().unwrap()),
            ));
        }
    }
    if kind == ExperimentKind::NormGrowth && !scheme.is_nested() {
        return Err(ctx.err("design", "scheme", "norm_growth needs a nested scheme"));
    }
    let fill = parse_fill(&ctx, &raw.design)?;
    if fill == FillMethod::Exact && dim != 1 {
        return Err(ctx.err("design", "fill", "exact fill distance is available on intervals only"));
    }

    let grid_points = raw
        .grid
        .as_ref()
        .map_or(default_grid_points(dim), |g| g.points_per_axis);
    if grid_points < MIN_GRID_POINTS {
        return Err(ctx.err(
            "grid",
            "points_per_axis",
            format!("must be at least {MIN_GRID_POINTS}, got {grid_points}"),
        ));
    }

    let target = raw.target.as_ref().map(|t| parse_target(&ctx, t, dim)).transpose()?;
    let needs_target = matches!(
        kind,
        ExperimentKind::Convergence | ExperimentKind::NormGrowth | ExperimentKind::InterpOnce
    );
    if needs_target && target.is_none() {
        return Err(ConfigError {
            line: None,
            field: Some("target".into()),
            message: format!("a [target] section is required by `{}`", kind.name()),
        });
    }
    if kind == ExperimentKind::Decay && target.is_some() {
        return Err(ctx.err("target", "name", "not used by `decay`"));
    }
    if let Some(spec) = &target {
        spec.build(&kernel)
            .map_err(|e| ctx.err("target", "centers", kinterp_message(e)))?;
    }

    let decay_node = raw.decay.as_ref().and_then(|d| d.node);
    if kind == ExperimentKind::Decay {
        if dim != 1 {
            return Err(ctx.err("kernel", "dim", "decay studies are defined on intervals only"));
        }
        if let Some(i) = decay_node {
            if i >= levels[0] {
                return Err(ctx.err(
                    "decay",
                    "node",
                    format!("index {i} out of range for the smallest level ({})", levels[0]),
                ));
            }
        }
    } else if raw.decay.is_some() {
        return Err(ConfigError {
            line: None,
            field: Some("decay".into()),
            message: format!("the [decay] section is not used by `{}`", kind.name()),
        });
    }

    let svg = raw.experiment.svg.unwrap_or(false);
    if svg && kind == ExperimentKind::InterpOnce && dim != 1 {
        return Err(ctx.err(
            "experiment",
            "svg",
            "interp_once charts are available on intervals only",
        ));
    }
    let lebesgue = match kind {
        ExperimentKind::LebesgueTrace => {
            if raw.experiment.lebesgue == Some(false) {
                return Err(ctx.err(
                    "experiment",
                    "lebesgue",
                    "lebesgue_trace always computes Lebesgue constants",
                ));
            }
            true
        }
        ExperimentKind::Convergence => raw.experiment.lebesgue.unwrap_or(true),
        ExperimentKind::InterpOnce => {
            ctx.unused(&raw.experiment.lebesgue, "experiment", "lebesgue", "by `interp_once`")?;
            false
        }
        _ => raw.experiment.lebesgue.unwrap_or(false),
    };

    Ok(ExperimentConfig {
        kind,
        output: raw.experiment.output,
        svg,
        lebesgue,
        kernel,
        domain,
        design: DesignSpec { scheme, levels, fill },
        grid_points,
        target,
        decay_node,
    })
}

/// Parses and validates config text.
pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::from_toml(&e, text))?;
    validate(raw, text)
}

/// Reads and parses a config file.
pub fn load(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| ConfigError::new(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

/// Key prefix of result metadata; such lines are skipped when a config is recovered.
pub const RESULT_PREFIX: &str = "result.";

/// Recovers the config from the `# key = value` metadata lines at the top of an
/// emitted CSV.
pub fn from_csv_metadata(csv: &str) -> Result<ExperimentConfig, ConfigError> {
    let text: String = csv
        .lines()
        .map_while(|l| l.strip_prefix('#'))
        .map(str::trim)
        .filter(|l| !l.starts_with(RESULT_PREFIX))
        .map(|l| format!("{l}\n"))
        .collect();
    parse(&text)
}

impl ExperimentConfig {
    fn to_raw(&self) -> RawConfig {
        let k = &self.kernel;
        let (gamma, interval) = match k.interval() {
            Some((a, b)) => (None, Some(vec![a, b])),
            None => (Some(k.gamma()), None),
        };
        let default_domain = BoxDomain::unit(k.dim());
        let domain = (self.domain != default_domain).then(|| RawDomain {
            lower: self.domain.lower().to_vec(),
            upper: self.domain.upper().to_vec(),
        });
        let mut design = RawDesign {
            scheme: self.design.scheme.name().into(),
            levels: Some(self.design.levels.clone()),
            ..RawDesign::default()
        };
        match &self.design.scheme {
            DesignScheme::Greedy { candidates, pool } => {
                design.candidates = Some(candidates.name().into());
                design.pool = Some(*pool);
                if let CandidateScheme::UniformRandom { seed } = candidates {
                    design.seed = Some(*seed);
                }
            }
            DesignScheme::Uniform { seed } => design.seed = Some(*seed),
            DesignScheme::Explicit { points } => design.points = Some(points.clone()),
            _ => {}
        }
        match self.design.fill {
            FillMethod::Exact => design.fill = Some("exact".into()),
            FillMethod::Probe(m) => {
                design.fill = Some("probe".into());
                design.probe_points = Some(m);
            }
            FillMethod::Auto(m) => {
                design.fill = Some("auto".into());
                design.probe_points = Some(m);
            }
        }
        let target = self.target.as_ref().map(|t| {
            let mut r = RawTarget::default();
            match t {
                TargetSpec::Zero => r.name = "zero".into(),
                TargetSpec::Constant { value } => {
                    r.name = "constant".into();
                    r.value = Some(*value);
                }
                TargetSpec::KernelTranslates { centers, weights } => {
                    r.name = "kernel_translates".into();
                    r.centers = Some(centers.clone());
                    r.weights = Some(weights.clone());
                }
                TargetSpec::AbsPower { center, exponent } => {
                    r.name = "abs_power".into();
                    r.center = Some(Numbers::Many(center.clone()));
                    r.exponent = Some(*exponent);
                }
                TargetSpec::SmoothStep { center, width } => {
                    r.name = "smooth_step".into();
                    r.center = Some(Numbers::One(*center));
                    r.width = Some(*width);
                }
                TargetSpec::Trig { frequency } => {
                    r.name = "trig".into();
                    r.frequency = Some(*frequency);
                }
            }
            r
        });
        let lebesgue = match self.kind {
            ExperimentKind::InterpOnce => None,
            _ => Some(self.lebesgue),
        };
        RawConfig {
            experiment: RawExperiment {
                kind: self.kind.name().into(),
                output: self.output.clone(),
                svg: Some(self.svg),
                lebesgue,
            },
            kernel: RawKernel {
                family: k.family().name().into(),
                gamma,
                dim: k.dim(),
                interval,
            },
            domain,
            design,
            grid: Some(RawGrid {
                points_per_axis: self.grid_points,
            }),
            target,
            decay: (self.kind == ExperimentKind::Decay).then_some(RawDecay { node: self.decay_node }),
        }
    }

    /// Canonical TOML form; parsing it gives back an equal config.
    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_raw()).expect("config serializes")
    }

    /// The canonical form as `(section.key, value)` pairs, ready for CSV metadata.
    pub fn metadata(&self) -> Vec<(String, String)> {
        let mut section = String::new();
        let mut out = Vec::new();
        for line in self.to_toml().lines() {
            let line = line.trim();
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.to_string();
            } else if let Some((k, v)) = line.split_once(" = ") {
                out.push((format!("{section}.{k}"), v.to_string()));
            }
        }
        out
    }

    /// Target function, when the config has one.
    pub fn build_target(&self) -> Option<Target> {
        self.target
            .as_ref()
            .map(|t| t.build(&self.kernel).expect("validated target"))
    }
}
