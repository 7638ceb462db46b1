//! Scattered-data interpolation with positive definite kernels.
//!
//! The crate covers the whole pipeline of a kernel interpolation study:
//!
//! * [`kernel`]: Matérn (ν = 1/2, 3/2, 5/2), Gaussian and interval `W_2^1` kernels and
//!   Gram assembly,
//! * [`geometry`]: point sets, fill/separation distance, geometric greedy designs,
//! * [`interp`]: Cholesky with a jitter ladder, interpolants, Lagrange functions and
//!   native-space norms,
//! * [`diagnostics`]: Lebesgue functions and constants, error norms, norm growth
//!   along nested designs, Lagrange decay fits and convergence tables.

mod compensated;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod interp;
pub mod kernel;
pub mod target;

pub use error::{Error, Result};
pub use geometry::{BoxDomain, NestedDesign, PointSet};
pub use grid::EvalGrid;
pub use interp::{fit, lagrange, Factorization, Interpolant, InterpolationSystem, LagrangeBasis};
pub use kernel::{assemble_gram, Family, GramMatrix, Kernel};
pub use target::Target;
