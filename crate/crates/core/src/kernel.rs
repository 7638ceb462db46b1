//! Kernel families, pointwise evaluation and Gram assembly.
//!
//! Translation-invariant kernels are evaluated as `k(x, y) = Φ(γ‖x − y‖)`, i.e. the
//! shape parameter scales distances before the radial profile is applied. The Matérn
//! profiles use the elementary half-integer forms with unit normalization constant:
//!
//! ```text
//! ν = 1/2 :  e^{-r}
//! ν = 3/2 :  (1 + r) e^{-r}
//! ν = 5/2 :  (3 + 3r + r²) e^{-r}
//! ```
//!
//! The normalization only rescales the native-space norm. Interpolants, Lagrange
//! functions and Lebesgue constants do not depend on it.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::geometry::PointSet;

/// Relative distance (to the domain diameter) below which two nodes count as one.
pub const DISTINCTNESS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Matern12,
    Matern32,
    Matern52,
    Gaussian,
    /// Reproducing kernel of `W_2^1(a, b)` with the full `H¹` inner product.
    IntervalSobolevW21,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Matern12,
        Family::Matern32,
        Family::Matern52,
        Family::Gaussian,
        Family::IntervalSobolevW21,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Matern12 => "matern12",
            Family::Matern32 => "matern32",
            Family::Matern52 => "matern52",
            Family::Gaussian => "gaussian",
            Family::IntervalSobolevW21 => "w21",
        }
    }

    pub fn is_matern(self) -> bool {
        matches!(self, Family::Matern12 | Family::Matern32 | Family::Matern52)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL.into_iter().find(|fam| fam.name() == s).ok_or_else(|| {
            Error::invalid(format!(
                "unknown kernel family `{s}` (expected matern12, matern32, matern52, gaussian or w21)"
            ))
        })
    }
}

/// A strictly positive definite kernel together with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    family: Family,
    gamma: f64,
    dim: usize,
    interval: Option<(f64, f64)>,
}

impl Kernel {
    /// Matérn or Gaussian kernel on `R^dim` with shape parameter `gamma`.
    pub fn new(family: Family, gamma: f64, dim: usize) -> Result<Self> {
        if family == Family::IntervalSobolevW21 {
            return Err(Error::invalid(
                "the W21 kernel needs an interval; use Kernel::interval_sobolev",
            ));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::invalid(format!("gamma must be positive, got {gamma}")));
        }
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        Ok(Kernel {
            family,
            gamma,
            dim,
            interval: None,
        })
    }

    pub fn matern12(gamma: f64, dim: usize) -> Result<Self> {
        Self::new(Family::Matern12, gamma, dim)
    }

    pub fn matern32(gamma: f64, dim: usize) -> Result<Self> {
        Self::new(Family::Matern32, gamma, dim)
    }

    pub fn matern52(gamma: f64, dim: usize) -> Result<Self> {
        Self::new(Family::Matern52, gamma, dim)
    }

    pub fn gaussian(gamma: f64, dim: usize) -> Result<Self> {
        Self::new(Family::Gaussian, gamma, dim)
    }

    /// Reproducing kernel of `W_2^1(a, b)`:
    ///
    /// ```text
    /// k(x, y) = cosh(b - max(x, y)) cosh(min(x, y) - a) / sinh(b - a)
    /// ```
    pub fn interval_sobolev(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::invalid(format!("interval needs a < b, got ({a}, {b})")));
        }
        Ok(Kernel {
            family: Family::IntervalSobolevW21,
            gamma: 1.0,
            dim: 1,
            interval: Some((a, b)),
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Shape parameter. Ignored by the interval kernel.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn interval(&self) -> Option<(f64, f64)> {
        self.interval
    }

    /// Matérn smoothness ν, if any.
    pub fn nu(&self) -> Option<f64> {
        match self.family {
            Family::Matern12 => Some(0.5),
            Family::Matern32 => Some(1.5),
            Family::Matern52 => Some(2.5),
            _ => None,
        }
    }

    /// Sobolev order τ of the native space: ν + N/2 for Matérn, 1 for the interval
    /// kernel and `+∞` for the Gaussian.
    pub fn sobolev_order(&self) -> f64 {
        match self.nu() {
            Some(nu) => nu + self.dim as f64 / 2.0,
            None if self.family == Family::IntervalSobolevW21 => 1.0,
            None => f64::INFINITY,
        }
    }

    /// Checks that `x` is a valid argument for this kernel.
    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if let Some((a, b)) = self.interval {
            let v = x[0];
            if !(a <= v && v <= b) {
                return Err(Error::OutsideDomain { value: v, a, b });
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(self.eval_unchecked(x, y))
    }

    /// Evaluation without argument checks. Callers validate point sets once up front.
    #[inline]
    pub fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.interval {
            Some((a, b)) => {
                let (lo, hi) = if x[0] <= y[0] { (x[0], y[0]) } else { (y[0], x[0]) };
                (b - hi).cosh() * (lo - a).cosh() / (b - a).sinh()
            }
            None => self.radial(distance(x, y)),
        }
    }

    /// Radial profile `Φ(γ r)` of the translation-invariant families.
    ///
    /// Panics when called on the interval kernel, which is not translation invariant.
    #[inline]
    pub fn radial(&self, r: f64) -> f64 {
        let s = self.gamma * r;
        match self.family {
            Family::Matern12 => (-s).exp(),
            Family::Matern32 => (1.0 + s) * (-s).exp(),
            Family::Matern52 => (3.0 + s * (3.0 + s)) * (-s).exp(),
            Family::Gaussian => (-s * s).exp(),
            Family::IntervalSobolevW21 => {
                panic!("the interval Sobolev kernel has no radial profile")
            }
        }
    }

    /// `k(x, x)`.
    pub fn diagonal(&self, x: &[f64]) -> f64 {
        self.eval_unchecked(x, x)
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.interval {
            Some((a, b)) => write!(f, "{}(a={a}, b={b})", self.family),
            None => write!(f, "{}(gamma={}, dim={})", self.family, self.gamma, self.dim),
        }
    }
}

#[inline]
pub(crate) fn distance_sq(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum()
}

#[inline]
pub(crate) fn distance(x: &[f64], y: &[f64]) -> f64 {
    distance_sq(x, y).sqrt()
}

/// Symmetric Gram matrix `K_ij = k(x_i, x_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: Array2<f64>,
}

impl GramMatrix {
    /// Wraps an explicit square symmetric matrix in standard layout.
    pub fn from_entries(entries: Array2<f64>) -> Result<Self> {
        let n = entries.nrows();
        if entries.ncols() != n {
            return Err(Error::invalid(format!(
                "{}x{} matrix is not square",
                n,
                entries.ncols()
            )));
        }
        for i in 0..n {
            for j in 0..i {
                if entries[[i, j]] != entries[[j, i]] {
                    return Err(Error::invalid(format!("matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(GramMatrix {
            entries: entries.as_standard_layout().into_owned(),
        })
    }

    pub fn order(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn max_diagonal(&self) -> f64 {
        self.entries.diag().iter().copied().fold(f64::MIN, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `K v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.entries
            .rows()
            .into_iter()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Assembles the Gram matrix of `kernel` on `nodes`.
///
/// The upper triangle is evaluated and mirrored, so the result is exactly symmetric.
/// Nodes closer than [`DISTINCTNESS_TOLERANCE`] times the domain diameter are rejected.
pub fn assemble_gram(kernel: &Kernel, nodes: &PointSet) -> Result<GramMatrix> {
    check_nodes(kernel, nodes)?;
    let n = nodes.len();
    let tol = DISTINCTNESS_TOLERANCE * nodes.domain().diameter();
    let mut k = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        let xi = nodes.point(i);
        k[[i, i]] = kernel.eval_unchecked(xi, xi);
        for j in (i + 1)..n {
            let xj = nodes.point(j);
            let d = distance(xi, xj);
            if d < tol {
                return Err(Error::DuplicateNodes {
                    first: i,
                    second: j,
                    distance: d,
                });
            }
            let v = kernel.eval_unchecked(xi, xj);
            k[[i, j]] = v;
            k[[j, i]] = v;
        }
    }
    Ok(GramMatrix { entries: k })
}

pub(crate) fn check_nodes(kernel: &Kernel, nodes: &PointSet) -> Result<()> {
    if nodes.dim() != kernel.dim() {
        return Err(Error::DimensionMismatch {
            expected: kernel.dim(),
            got: nodes.dim(),
        });
    }
    nodes.iter().try_for_each(|p| kernel.check_point(p))
}
