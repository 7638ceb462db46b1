//! Built-in target functions.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::kernel::{distance, Kernel};

#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Zero,
    Constant(f64),
    /// `Σ_j w_j k(c_j, x)`, an element of the kernel's native space.
    KernelTranslates {
        kernel: Kernel,
        centers: Vec<Vec<f64>>,
        weights: Vec<f64>,
    },
    /// `‖x − c‖^p`.
    AbsPower {
        center: Vec<f64>,
        exponent: f64,
    },
    /// `½(1 + tanh((x₁ − c)/w))`.
    SmoothStep {
        center: f64,
        width: f64,
    },
    /// `Π_d sin(2π f x_d)`.
    Trig {
        frequency: f64,
    },
}

impl Target {
    pub fn translates(kernel: &Kernel, centers: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if centers.is_empty() || centers.len() != weights.len() {
            return Err(Error::invalid(format!(
                "{} centers and {} weights",
                centers.len(),
                weights.len()
            )));
        }
        centers.iter().try_for_each(|c| kernel.check_point(c))?;
        Ok(Target::KernelTranslates {
            kernel: kernel.clone(),
            centers,
            weights,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Target::Zero => "zero",
            Target::Constant(_) => "constant",
            Target::KernelTranslates { .. } => "kernel_translates",
            Target::AbsPower { .. } => "abs_power",
            Target::SmoothStep { .. } => "smooth_step",
            Target::Trig { .. } => "trig",
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Target::Zero => 0.0,
            Target::Constant(c) => *c,
            Target::KernelTranslates {
                kernel,
                centers,
                weights,
            } => centers
                .iter()
                .zip(weights)
                .map(|(c, w)| w * kernel.eval_unchecked(c, x))
                .sum(),
            Target::AbsPower { center, exponent } => distance(x, center).powf(*exponent),
            Target::SmoothStep { center, width } => 0.5 * (1.0 + ((x[0] - center) / width).tanh()),
            Target::Trig { frequency } => x.iter().map(|t| (2.0 * PI * frequency * t).sin()).product(),
        }
    }

    /// Values at every point of a flat coordinate list.
    pub fn sample(&self, coords: &[f64], dim: usize) -> Vec<f64> {
        coords.chunks_exact(dim).map(|p| self.eval(p)).collect()
    }

    /// Exact native-space norm, when the target is a known kernel expansion.
    pub fn native_norm(&self) -> Option<f64> {
        match self {
            Target::Zero => Some(0.0),
            Target::KernelTranslates {
                kernel,
                centers,
                weights,
            } => {
                let sq: f64 = centers
                    .iter()
                    .zip(weights)
                    .flat_map(|(ci, wi)| {
                        centers
                            .iter()
                            .zip(weights)
                            .map(move |(cj, wj)| wi * wj * kernel.eval_unchecked(ci, cj))
                    })
                    .sum();
                Some(sq.max(0.0).sqrt())
            }
            _ => None,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Zero => write!(f, "zero"),
            Target::Constant(c) => write!(f, "constant({c})"),
            Target::KernelTranslates { centers, weights, .. } => {
                write!(f, "kernel_translates(centers={centers:?}, weights={weights:?})")
            }
            Target::AbsPower { center, exponent } => write!(f, "abs_power(center={center:?}, exponent={exponent})"),
            Target::SmoothStep { center, width } => write!(f, "smooth_step(center={center}, width={width})"),
            Target::Trig { frequency } => write!(f, "trig(frequency={frequency})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn values() {
        assert_eq!(Target::Constant(2.0).eval(&[0.3]), 2.0);
        let t = Target::AbsPower {
            center: vec![0.5],
            exponent: 1.0 / 3.0,
        };
        assert_relative_eq!(t.eval(&[0.5 + 0.125]), 0.5, epsilon = 1e-15);
        let s = Target::SmoothStep {
            center: 0.5,
            width: 0.1,
        };
        assert_eq!(s.eval(&[0.5]), 0.5);
        assert_relative_eq!(
            Target::Trig { frequency: 1.0 }.eval(&[0.25, 0.25]),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn translate_norm() {
        let k = Kernel::matern12(1.0, 1).unwrap();
        let t = Target::translates(&k, vec![vec![0.0], vec![1.0]], vec![1.0, 1.0]).unwrap();
        let e = (-1.0f64).exp();
        assert_relative_eq!(t.native_norm().unwrap(), (2.0 + 2.0 * e).sqrt(), epsilon = 1e-15);
        assert!(Target::translates(&k, vec![vec![0.0]], vec![]).is_err());
    }
}
