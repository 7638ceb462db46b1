//! Tensor evaluation grids with trapezoidal quadrature weights.
//!
//! Suprema over the domain are replaced by maxima over the grid points, so every
//! sup-type quantity computed on a grid is a lower bound of the continuous one.
//! Refining with [`EvalGrid::refine`] yields a superset of the previous points.

use crate::error::{Error, Result};
use crate::geometry::BoxDomain;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalGrid {
    domain: BoxDomain,
    per_axis: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
}

impl EvalGrid {
    /// `per_axis` equispaced points per axis, endpoints included, ordered
    /// lexicographically with the first axis most significant.
    pub fn new(domain: BoxDomain, per_axis: usize) -> Result<Self> {
        if per_axis < 2 {
            return Err(Error::invalid(format!(
                "grid needs at least 2 points per axis, got {per_axis}"
            )));
        }
        let dim = domain.dim();
        let total = per_axis
            .checked_pow(dim as u32)
            .ok_or_else(|| Error::invalid("grid too large"))?;
        let axes: Vec<Vec<f64>> = (0..dim)
            .map(|d| {
                let (lo, hi) = (domain.lower()[d], domain.upper()[d]);
                let step = (hi - lo) / (per_axis - 1) as f64;
                (0..per_axis)
                    .map(|i| if i == per_axis - 1 { hi } else { lo + i as f64 * step })
                    .collect()
            })
            .collect();
        let axis_weights: Vec<Vec<f64>> = (0..dim)
            .map(|d| {
                let step = (domain.upper()[d] - domain.lower()[d]) / (per_axis - 1) as f64;
                (0..per_axis)
                    .map(|i| if i == 0 || i == per_axis - 1 { 0.5 * step } else { step })
                    .collect()
            })
            .collect();

        let mut coords = Vec::with_capacity(total * dim);
        let mut weights = Vec::with_capacity(total);
        let mut idx = vec![0usize; dim];
        for _ in 0..total {
            let mut w = 1.0;
            for d in 0..dim {
                coords.push(axes[d][idx[d]]);
                w *= axis_weights[d][idx[d]];
            }
            weights.push(w);
            for d in (0..dim).rev() {
                idx[d] += 1;
                if idx[d] < per_axis {
                    break;
                }
                idx[d] = 0;
            }
        }
        Ok(EvalGrid {
            domain,
            per_axis,
            coords,
            weights,
        })
    }

    /// Grid with `2m - 1` points per axis, containing every point of this one.
    pub fn refine(&self) -> Result<Self> {
        EvalGrid::new(self.domain.clone(), 2 * self.per_axis - 1)
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn per_axis(&self) -> usize {
        self.per_axis
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.coords[i * d..(i + 1) * d]
    }

    /// Flat row-major coordinates.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn spacing(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|d| (self.domain.upper()[d] - self.domain.lower()[d]) / (self.per_axis - 1) as f64)
            .collect()
    }

    /// Half the diagonal of one grid cell: the largest distance from a domain point to
    /// its nearest grid point.
    pub fn covering_radius(&self) -> f64 {
        0.5 * self.spacing().iter().map(|s| s * s).sum::<f64>().sqrt()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_volume() {
        for (dom, m) in [
            (BoxDomain::interval(0.0, 1.0).unwrap(), 4097),
            (BoxDomain::new(vec![-1.0, 0.0], vec![2.0, 0.5]).unwrap(), 33),
            (BoxDomain::unit(3), 9),
        ] {
            let g = EvalGrid::new(dom.clone(), m).unwrap();
            let s: f64 = g.weights().iter().sum();
            assert_relative_eq!(s, dom.volume(), max_relative = 1e-10);
        }
    }

    #[test]
    fn points_are_lexicographic() {
        let g = EvalGrid::new(BoxDomain::unit(2), 5).unwrap();
        assert_eq!(g.len(), 25);
        let pts: Vec<&[f64]> = g.iter().collect();
        for w in pts.windows(2) {
            assert!(w[0] < w[1]);
        }
        assert_eq!(pts[0], &[0.0, 0.0]);
        assert_eq!(pts[1], &[0.0, 0.25]);
        assert_eq!(pts[24], &[1.0, 1.0]);
    }

    #[test]
    fn refinement_is_nested() {
        let g = EvalGrid::new(BoxDomain::interval(0.0, 3.0).unwrap(), 17).unwrap();
        let f = g.refine().unwrap();
        assert_eq!(f.per_axis(), 33);
        for (i, p) in g.iter().enumerate() {
            assert_eq!(p, f.point(2 * i));
        }
    }

    #[test]
    fn rejects_degenerate_grid() {
        assert!(EvalGrid::new(BoxDomain::unit(1), 1).is_err());
    }
}
