//! Minimal-norm kernel interpolation.
//!
//! The interpolant of data `r` on nodes `X` is `s(x) = Σ α_i k(x_i, x)` with
//! `K α = r`. Its native-space norm is `‖s‖² = rᵀ K⁻¹ r = rᵀ α`.

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use crate::compensated::{dot_pair, Accumulator};
use crate::error::{Error, Result};
use crate::geometry::PointSet;
use crate::kernel::{assemble_gram, GramMatrix, Kernel};

/// Diagonal shifts tried after a plain factorization fails, relative to `max diag K`.
pub const JITTER_LADDER: [f64; 4] = [1e-14, 1e-12, 1e-10, 1e-8];

/// Cholesky factor `L Lᵀ = K + jitter·I`.
#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    lower: Array2<f64>,
    // Lᵀ in row-major order for the backward sweep
    upper: Array2<f64>,
    jitter: f64,
}

impl Factorization {
    fn from_lower(lower: Array2<f64>, jitter: f64) -> Self {
        let upper = lower.t().as_standard_layout().into_owned();
        Factorization { lower, upper, jitter }
    }
}

/// Failed pivot of a plain Cholesky attempt.
#[derive(Debug, Clone, Copy)]
struct PivotFailure {
    pivot: usize,
    value: f64,
}

fn cholesky(a: ArrayView2<f64>, shift: f64) -> std::result::Result<Array2<f64>, PivotFailure> {
    let n = a.nrows();
    // row-major; row i of L is contiguous so the inner products are slice dots
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let dot: f64 = l[i * n..i * n + j]
                .iter()
                .zip(&l[j * n..j * n + j])
                .map(|(x, y)| x * y)
                .sum();
            let v = a[[i, j]] - dot;
            if i == j {
                let v = v + shift;
                if !(v > 0.0 && v.is_finite()) {
                    return Err(PivotFailure { pivot: i, value: v });
                }
                l[i * n + i] = v.sqrt();
            } else {
                l[i * n + j] = v / l[j * n + j];
            }
        }
    }
    Ok(Array2::from_shape_vec((n, n), l).expect("square shape"))
}

/// SPD factorization with the diagonal-jitter escalation ladder.
///
/// A plain factorization is tried first; on failure the shifts of [`JITTER_LADDER`]
/// (times the largest diagonal entry) are tried in order and the first success is
/// recorded in [`Factorization::jitter`].
pub fn factorize(gram: &GramMatrix) -> Result<Factorization> {
    let k = gram.entries();
    let scale = gram.max_diagonal();
    let mut last = match cholesky(k.view(), 0.0) {
        Ok(lower) => return Ok(Factorization::from_lower(lower, 0.0)),
        Err(f) => (f, 0.0),
    };
    for rel in JITTER_LADDER {
        let jitter = rel * scale;
        match cholesky(k.view(), jitter) {
            Ok(lower) => return Ok(Factorization::from_lower(lower, jitter)),
            Err(f) => last = (f, jitter),
        }
    }
    Err(Error::NotPositiveDefinite {
        pivot: last.0.pivot,
        value: last.0.value,
        jitter: last.1,
    })
}

impl Factorization {
    pub fn order(&self) -> usize {
        self.lower.nrows()
    }

    pub fn lower(&self) -> &Array2<f64> {
        &self.lower
    }

    /// Diagonal shift that was needed, `0` for a plain factorization.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Solves `(K + jitter·I) x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.order();
        assert_eq!(b.len(), n, "right-hand side length");
        let l = &self.lower;
        for i in 0..n {
            let row = l.row(i);
            let row = row.as_slice().expect("standard layout");
            let dot: f64 = row[..i].iter().zip(&b[..i]).map(|(x, y)| x * y).sum();
            b[i] = (b[i] - dot) / row[i];
        }
        let u = &self.upper;
        for i in (0..n).rev() {
            let row = u.row(i);
            let row = row.as_slice().expect("standard layout");
            let dot: f64 = row[i + 1..].iter().zip(&b[i + 1..]).map(|(x, y)| x * y).sum();
            b[i] = (b[i] - dot) / row[i];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Solves `(K + jitter·I) x = b` with iterative refinement whose residuals are
    /// accumulated in double-double arithmetic. The solution is returned as an
    /// unevaluated pair `hi + lo` together with the final `f64` residual norm.
    pub fn solve_refined(&self, gram: &GramMatrix, b: &[f64]) -> RefinedSolution {
        let n = self.order();
        let k = gram.entries();
        let mut hi = self.solve(b);
        let mut lo = vec![0.0; n];
        let mut best = RefinedSolution {
            hi: hi.clone(),
            lo: lo.clone(),
            residual: f64::INFINITY,
        };
        for _ in 0..MAX_REFINEMENT_STEPS {
            let r: Vec<f64> = (0..n)
                .map(|i| {
                    let row = k.row(i);
                    let mut acc = Accumulator::new(b[i]);
                    for (j, kij) in row.iter().enumerate() {
                        acc.add_product(-kij, hi[j]);
                        acc.add_product(-kij, lo[j]);
                    }
                    acc.add_product(-self.jitter, hi[i]);
                    acc.add_product(-self.jitter, lo[i]);
                    acc.value()
                })
                .collect();
            let res = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if res < best.residual {
                best = RefinedSolution {
                    hi: hi.clone(),
                    lo: lo.clone(),
                    residual: res,
                };
            } else {
                break;
            }
            if res == 0.0 {
                break;
            }
            let d = self.solve(&r);
            for j in 0..n {
                let mut acc = Accumulator::new(hi[j]);
                acc.add(lo[j]);
                acc.add(d[j]);
                (hi[j], lo[j]) = acc.pair();
            }
        }
        best
    }

    /// `(K + jitter·I)⁻¹`, one column solve per unit vector.
    pub fn inverse(&self) -> Array2<f64> {
        let n = self.order();
        let cols: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                self.solve_in_place(&mut e);
                e
            })
            .collect();
        let mut inv = Array2::<f64>::zeros((n, n));
        for (j, c) in cols.iter().enumerate() {
            for (i, v) in c.iter().enumerate() {
                inv[[i, j]] = *v;
            }
        }
        inv
    }

    /// `‖L Lᵀ − (K + jitter·I)‖_max`.
    pub fn reconstruction_residual(&self, gram: &GramMatrix) -> f64 {
        let mut llt = self.lower.dot(&self.lower.t());
        llt -= gram.entries();
        llt.diag_mut().iter_mut().for_each(|d| *d -= self.jitter);
        llt.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Upper bound on refinement sweeps; each sweep costs two triangular solves.
pub const MAX_REFINEMENT_STEPS: usize = 8;

/// Solution of a refined solve, `x = hi + lo`.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinedSolution {
    pub hi: Vec<f64>,
    pub lo: Vec<f64>,
    /// `‖b − (K + jitter·I)(hi + lo)‖_∞`.
    pub residual: f64,
}

/// Kernel, nodes and factorized Gram matrix, shared by every fit on the same nodes.
#[derive(Debug, Clone)]
pub struct InterpolationSystem {
    kernel: Kernel,
    nodes: PointSet,
    gram: GramMatrix,
    factorization: Factorization,
}

impl InterpolationSystem {
    pub fn new(kernel: &Kernel, nodes: &PointSet) -> Result<Self> {
        let gram = assemble_gram(kernel, nodes)?;
        let factorization = factorize(&gram)?;
        Ok(InterpolationSystem {
            kernel: kernel.clone(),
            nodes: nodes.clone(),
            gram,
            factorization,
        })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn nodes(&self) -> &PointSet {
        &self.nodes
    }

    pub fn gram(&self) -> &GramMatrix {
        &self.gram
    }

    pub fn factorization(&self) -> &Factorization {
        &self.factorization
    }

    pub fn fit(&self, values: &[f64]) -> Result<Interpolant> {
        if values.len() != self.nodes.len() {
            return Err(Error::invalid(format!(
                "{} data values for {} nodes",
                values.len(),
                self.nodes.len()
            )));
        }
        let sol = self.factorization.solve_refined(&self.gram, values);
        let k = self.gram.entries();
        let residual = values
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let row = k.row(i);
                let row = row.as_slice().expect("standard layout");
                (dot_pair(&sol.hi, &sol.lo, row.iter().copied()) - r).abs()
            })
            .fold(0.0f64, f64::max);
        Ok(Interpolant {
            kernel: self.kernel.clone(),
            nodes: self.nodes.clone(),
            coefficients: sol.hi,
            coefficients_lo: sol.lo,
            data: values.to_vec(),
            jitter: self.factorization.jitter,
            residual,
        })
    }

    /// Lagrange function `l_i` with `l_i(x_j) = δ_ij`.
    pub fn lagrange(&self, i: usize) -> Result<Interpolant> {
        let n = self.nodes.len();
        if i >= n {
            return Err(Error::invalid(format!("node index {i} out of range for {n} nodes")));
        }
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        self.fit(&e)
    }

    /// All Lagrange functions at once from `K C = I`.
    pub fn lagrange_basis(&self) -> LagrangeBasis {
        LagrangeBasis {
            kernel: self.kernel.clone(),
            nodes: self.nodes.clone(),
            coefficients: self.factorization.inverse(),
            jitter: self.factorization.jitter,
        }
    }
}

/// Fitted interpolant `s(x) = Σ α_i k(x_i, x)`. Immutable after the fit.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpolant {
    kernel: Kernel,
    nodes: PointSet,
    coefficients: Vec<f64>,
    // rounding remainder of the coefficients, α = coefficients + coefficients_lo
    coefficients_lo: Vec<f64>,
    data: Vec<f64>,
    jitter: f64,
    residual: f64,
}

/// Interpolant of `values` on `nodes`.
pub fn fit(kernel: &Kernel, nodes: &PointSet, values: &[f64]) -> Result<Interpolant> {
    InterpolationSystem::new(kernel, nodes)?.fit(values)
}

/// Lagrange function of node `i`.
pub fn lagrange(kernel: &Kernel, nodes: &PointSet, i: usize) -> Result<Interpolant> {
    InterpolationSystem::new(kernel, nodes)?.lagrange(i)
}

/// Native-space norm of an interpolant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NativeNorm {
    pub value: f64,
    /// `rᵀα` came out negative through roundoff and was clamped to zero.
    pub clamped: bool,
}

impl Interpolant {
    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn nodes(&self) -> &PointSet {
        &self.nodes
    }

    /// `α` rounded to `f64`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Rounding remainder: the fitted coefficient vector is `coefficients + coefficients_lo`.
    pub fn coefficients_lo(&self) -> &[f64] {
        &self.coefficients_lo
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// `‖K α − r‖_∞` measured right after the solve.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Whether the post-solve residual meets `‖Kα − r‖_∞ ≤ 10⁻⁸ ‖r‖_∞`.
    pub fn residual_ok(&self) -> bool {
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        self.residual <= 1e-8 * scale
    }

    pub fn evaluate_at(&self, x: &[f64]) -> Result<f64> {
        self.kernel.check_point(x)?;
        Ok(self.eval_unchecked(x))
    }

    #[inline]
    fn eval_unchecked(&self, x: &[f64]) -> f64 {
        dot_pair(
            &self.coefficients,
            &self.coefficients_lo,
            self.nodes.iter().map(|xi| self.kernel.eval_unchecked(xi, x)),
        )
    }

    /// Evaluates at every point of a flat row-major coordinate list.
    pub fn evaluate(&self, coords: &[f64]) -> Result<Vec<f64>> {
        let dim = self.kernel.dim();
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: coords.len() % dim,
            });
        }
        coords.chunks_exact(dim).try_for_each(|p| self.kernel.check_point(p))?;
        Ok(coords.par_chunks(dim).map(|p| self.eval_unchecked(p)).collect())
    }

    /// Rounding floor of [`Interpolant::evaluate`]: `ε Σ_j |α_j k(x_j, x)|` per point.
    /// Values below a small multiple of it are indistinguishable from cancellation noise.
    pub fn rounding_floor(&self, coords: &[f64]) -> Result<Vec<f64>> {
        let dim = self.kernel.dim();
        coords.chunks_exact(dim).try_for_each(|p| self.kernel.check_point(p))?;
        Ok(coords
            .par_chunks(dim)
            .map(|p| {
                f64::EPSILON
                    * self
                        .nodes
                        .iter()
                        .zip(&self.coefficients)
                        .map(|(xi, a)| (a * self.kernel.eval_unchecked(xi, p)).abs())
                        .sum::<f64>()
            })
            .collect())
    }

    /// `√(rᵀα)`.
    pub fn native_norm(&self) -> NativeNorm {
        let sq = dot_pair(&self.coefficients, &self.coefficients_lo, self.data.iter().copied());
        if sq < 0.0 {
            NativeNorm {
                value: 0.0,
                clamped: true,
            }
        } else {
            NativeNorm {
                value: sq.sqrt(),
                clamped: false,
            }
        }
    }

    /// `αᵀ K α`, the squared norm by the second algebraic route.
    pub fn native_norm_sq_quadratic(&self) -> Result<f64> {
        let gram = assemble_gram(&self.kernel, &self.nodes)?;
        let k = gram.entries();
        let kalpha: Vec<f64> = (0..self.nodes.len())
            .map(|i| {
                let row = k.row(i);
                let row = row.as_slice().expect("standard layout");
                dot_pair(&self.coefficients, &self.coefficients_lo, row.iter().copied())
            })
            .collect();
        Ok(dot_pair(&self.coefficients, &self.coefficients_lo, kalpha))
    }

    /// CSV with one row per node: `index, x1..xN, data, coefficient`.
    pub fn to_csv(&self) -> String {
        let dim = self.kernel.dim();
        let mut out = String::from("index");
        for d in 1..=dim {
            out.push_str(&format!(",x{d}"));
        }
        out.push_str(",data,coefficient\n");
        for (i, ((p, r), a)) in self.nodes.iter().zip(&self.data).zip(&self.coefficients).enumerate() {
            out.push_str(&i.to_string());
            for c in p {
                out.push_str(&format!(",{c:?}"));
            }
            out.push_str(&format!(",{r:?},{a:?}\n"));
        }
        out
    }
}

/// Coefficients of all Lagrange functions: column `i` of `coefficients` holds `l_i`.
#[derive(Debug, Clone)]
pub struct LagrangeBasis {
    kernel: Kernel,
    nodes: PointSet,
    coefficients: Array2<f64>,
    jitter: f64,
}

const EVAL_BLOCK: usize = 512;

impl LagrangeBasis {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn nodes(&self) -> &PointSet {
        &self.nodes
    }

    pub fn coefficients(&self) -> &Array2<f64> {
        &self.coefficients
    }

    fn kernel_block(&self, coords: &[f64]) -> Array2<f64> {
        let dim = self.kernel.dim();
        let m = coords.len() / dim;
        let n = self.nodes.len();
        let mut kx = Array2::<f64>::zeros((m, n));
        for (r, p) in coords.chunks_exact(dim).enumerate() {
            for (c, xi) in self.nodes.iter().enumerate() {
                kx[[r, c]] = self.kernel.eval_unchecked(xi, p);
            }
        }
        kx
    }

    fn check(&self, coords: &[f64]) -> Result<()> {
        let dim = self.kernel.dim();
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: coords.len() % dim,
            });
        }
        coords.chunks_exact(dim).try_for_each(|p| self.kernel.check_point(p))
    }

    /// Matrix of Lagrange values: row per point, column per node.
    pub fn values(&self, coords: &[f64]) -> Result<Array2<f64>> {
        self.check(coords)?;
        let dim = self.kernel.dim();
        let blocks: Vec<Array2<f64>> = coords
            .par_chunks(EVAL_BLOCK * dim)
            .map(|blk| self.kernel_block(blk).dot(&self.coefficients))
            .collect();
        let views: Vec<_> = blocks.iter().map(|b| b.view()).collect();
        Ok(ndarray::concatenate(ndarray::Axis(0), &views).unwrap_or_else(|_| Array2::zeros((0, self.len()))))
    }

    /// Lebesgue function `Σ_i |l_i(x)|` at every point.
    pub fn lebesgue_function(&self, coords: &[f64]) -> Result<Vec<f64>> {
        self.check(coords)?;
        let dim = self.kernel.dim();
        let parts: Vec<Vec<f64>> = coords
            .par_chunks(EVAL_BLOCK * dim)
            .map(|blk| {
                let vals = self.kernel_block(blk).dot(&self.coefficients);
                vals.rows()
                    .into_iter()
                    .map(|r| r.iter().map(|v| v.abs()).sum())
                    .collect()
            })
            .collect();
        Ok(parts.concat())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{equispaced, BoxDomain};
    use approx::assert_relative_eq;
    use ndarray::array;

    fn line(xs: &[f64]) -> PointSet {
        PointSet::new(BoxDomain::unit(1), xs.to_vec()).unwrap()
    }

    fn m12() -> Kernel {
        Kernel::matern12(1.0, 1).unwrap()
    }

    #[test]
    fn factorize_one_by_one() {
        let g = assemble_gram(&m12(), &line(&[0.0])).unwrap();
        let f = factorize(&g).unwrap();
        assert_eq!(f.lower(), &array![[1.0]]);
        assert_eq!(f.jitter(), 0.0);
    }

    #[test]
    fn factorize_two_by_two() {
        let g = assemble_gram(&m12(), &line(&[0.0, 1.0])).unwrap();
        let f = factorize(&g).unwrap();
        let e = (-1.0f64).exp();
        let l = f.lower();
        assert_relative_eq!(l[[0, 0]], 1.0, epsilon = 1e-15);
        assert_relative_eq!(l[[1, 0]], e, epsilon = 1e-15);
        assert_relative_eq!(l[[1, 1]], (1.0 - e * e).sqrt(), epsilon = 1e-15);
        assert_relative_eq!(l[[1, 1]], 0.92987, epsilon = 1e-5);
        assert_eq!(l[[0, 1]], 0.0);
        assert!(f.reconstruction_residual(&g) <= 1e-10 * g.max_abs());
    }

    #[test]
    fn near_coincident_gaussian_is_never_silent() {
        let k = Kernel::gaussian(10.0, 1).unwrap();
        let xs: Vec<f64> = (0..200).map(|i| 0.5 + i as f64 * 1e-9).collect();
        let g = assemble_gram(&k, &line(&xs)).unwrap();
        match factorize(&g) {
            Ok(f) => {
                assert!(f.jitter() > 0.0);
                assert!(f.reconstruction_residual(&g) <= 1e-10 * g.max_abs());
            }
            Err(Error::NotPositiveDefinite { pivot, jitter, .. }) => {
                assert!(pivot < 200);
                assert_eq!(jitter, JITTER_LADDER[3] * g.max_diagonal());
            }
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn indefinite_matrix_names_pivot() {
        let g = GramMatrix::from_entries(array![[1.0, 2.0], [2.0, 1.0]]).unwrap();
        assert!(GramMatrix::from_entries(array![[1.0, 2.0], [0.0, 1.0]]).is_err());
        match factorize(&g) {
            Err(Error::NotPositiveDefinite { pivot, .. }) => assert_eq!(pivot, 1),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn fit_examples() {
        let s = fit(&m12(), &line(&[0.0]), &[2.0]).unwrap();
        assert_eq!(s.coefficients(), &[2.0]);
        assert_eq!(s.native_norm().value, 2.0);

        let e = (-1.0f64).exp();
        let det = 1.0 - e * e;
        assert_relative_eq!(det, 0.864665, epsilon = 1e-6);
        let s = fit(&m12(), &line(&[0.0, 1.0]), &[1.0, 0.0]).unwrap();
        let a = s.coefficients();
        assert_relative_eq!(a[0], 1.0 / det, epsilon = 1e-14);
        assert_relative_eq!(a[1], -e / det, epsilon = 1e-14);
        assert_relative_eq!(a[0], 1.15652, epsilon = 1e-5);
        assert_relative_eq!(a[1], -0.42546, epsilon = 1e-5);
        let mid = s.evaluate_at(&[0.5]).unwrap();
        assert_relative_eq!(mid, (a[0] + a[1]) * (-0.5f64).exp(), epsilon = 1e-14);
        assert_relative_eq!(mid, 0.44341, epsilon = 1e-5);
        assert_relative_eq!(s.native_norm().value, (1.0 / det).sqrt(), epsilon = 1e-14);
        assert_relative_eq!(s.native_norm().value, 1.07542, epsilon = 1e-5);
    }

    #[test]
    fn gram_column_gives_unit_coefficients() {
        let k = Kernel::matern32(3.0, 1).unwrap();
        let x = equispaced(0.0, 1.0, 12).unwrap();
        let sys = InterpolationSystem::new(&k, &x).unwrap();
        for i in [0, 5, 11] {
            let col: Vec<f64> = sys.gram().entries().column(i).to_vec();
            let s = sys.fit(&col).unwrap();
            for (j, (h, l)) in s.coefficients().iter().zip(s.coefficients_lo()).enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((h + l - want).abs() < 1e-10, "i={i} j={j}");
            }
        }
    }

    #[test]
    fn evaluation_reproduces_data_and_matches_batch() {
        let k = Kernel::matern52(2.0, 1).unwrap();
        let x = equispaced(0.0, 1.0, 20).unwrap();
        let r: Vec<f64> = x.iter().map(|p| (5.0 * p[0]).sin()).collect();
        let s = fit(&k, &x, &r).unwrap();
        assert!(s.residual_ok());
        let at_nodes = s.evaluate(x.coords()).unwrap();
        for (v, d) in at_nodes.iter().zip(&r) {
            assert!((v - d).abs() <= 1e-6 * 2.0);
        }
        let probe: Vec<f64> = (0..57).map(|i| i as f64 / 56.0).collect();
        let batch = s.evaluate(&probe).unwrap();
        for (p, b) in probe.iter().zip(&batch) {
            assert_eq!(s.evaluate_at(&[*p]).unwrap().to_bits(), b.to_bits());
        }
        let zero = fit(&k, &x, &[0.0; 20]).unwrap();
        assert!(zero.evaluate(&probe).unwrap().iter().all(|v| *v == 0.0));
        assert!(s.evaluate(&[0.1, 0.2, 0.3]).is_ok());
        assert!(s.evaluate_at(&[0.1, 0.2]).is_err());
    }

    #[test]
    fn single_node_lagrange_is_normalized_kernel() {
        let k = Kernel::matern32(4.0, 1).unwrap();
        let x = line(&[0.3]);
        let l = lagrange(&k, &x, 0).unwrap();
        for t in [0.0, 0.1, 0.3, 0.77, 1.0] {
            let want = k.eval(&[0.3], &[t]).unwrap() / k.diagonal(&[0.3]);
            assert_relative_eq!(l.evaluate_at(&[t]).unwrap(), want, epsilon = 1e-15);
            assert!(want > 0.0);
        }
        assert!(lagrange(&k, &x, 1).is_err());
    }

    #[test]
    fn lagrange_form_matches_fit() {
        let k = Kernel::matern32(1.0, 2).unwrap();
        let dom = BoxDomain::unit(2);
        let pts: Vec<Vec<f64>> = (0..30)
            .map(|i| {
                let t = i as f64;
                vec![(t * 0.618034).fract(), (t * 0.414214 + 0.05).fract()]
            })
            .collect();
        let x = PointSet::from_points(dom, &pts).unwrap();
        let r: Vec<f64> = pts.iter().map(|p| p[0] * p[0] - p[1]).collect();
        let sys = InterpolationSystem::new(&k, &x).unwrap();
        let s = sys.fit(&r).unwrap();
        let probe: Vec<f64> = (0..100)
            .flat_map(|i| {
                let t = i as f64;
                [(t * 0.7548777).fract(), (t * 0.5698403).fract()]
            })
            .collect();
        let direct = s.evaluate(&probe).unwrap();
        let lag = sys.lagrange_basis().values(&probe).unwrap();
        for (row, d) in lag.rows().into_iter().zip(&direct) {
            let via: f64 = row.iter().zip(&r).map(|(l, f)| l * f).sum();
            assert!((via - d).abs() <= 1e-8 * (1.0 + d.abs()), "{via} vs {d}");
        }
    }

    #[test]
    fn linearity_of_fit() {
        let k = Kernel::matern32(1.0, 1).unwrap();
        let x = equispaced(0.0, 1.0, 25).unwrap();
        let sys = InterpolationSystem::new(&k, &x).unwrap();
        let r1: Vec<f64> = (0..25).map(|i| (i as f64 * 0.7).cos()).collect();
        let r2: Vec<f64> = (0..25).map(|i| (i as f64 * 0.3).sin()).collect();
        let (a, b) = (2.5, -1.25);
        let mix: Vec<f64> = r1.iter().zip(&r2).map(|(u, v)| a * u + b * v).collect();
        let s1 = sys.fit(&r1).unwrap();
        let s2 = sys.fit(&r2).unwrap();
        let s = sys.fit(&mix).unwrap();
        let full = |s: &Interpolant| -> Vec<f64> {
            s.coefficients()
                .iter()
                .zip(s.coefficients_lo())
                .map(|(h, l)| h + l)
                .collect()
        };
        let scale = full(&s).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for ((c, c1), c2) in full(&s).iter().zip(full(&s1)).zip(full(&s2)) {
            assert!((c - (a * c1 + b * c2)).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn norm_routes_agree() {
        let k = Kernel::matern52(3.0, 1).unwrap();
        let x = equispaced(0.0, 1.0, 100).unwrap();
        let r: Vec<f64> = (0..100).map(|i| ((i * 37 % 101) as f64 / 50.0) - 1.0).collect();
        let s = fit(&k, &x, &r).unwrap();
        let n = s.native_norm();
        assert!(!n.clamped);
        let quad = s.native_norm_sq_quadratic().unwrap();
        assert_relative_eq!(n.value * n.value, quad, max_relative = 1e-8);
    }

    #[test]
    fn inverse_and_refined_solve() {
        let k = Kernel::matern32(1.0, 1).unwrap();
        let x = equispaced(0.0, 1.0, 40).unwrap();
        let g = assemble_gram(&k, &x).unwrap();
        let f = factorize(&g).unwrap();
        let inv = f.inverse();
        let prod = g.entries().dot(&inv);
        for i in 0..40 {
            for j in 0..40 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((prod[[i, j]] - want).abs() < 1e-6);
            }
        }
        let b: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let sol = f.solve_refined(&g, &b);
        assert!(sol.residual <= 1e-10 * 39.0);
    }

    #[test]
    fn csv_lists_nodes_data_and_coefficients() {
        let s = fit(&m12(), &line(&[0.0]), &[2.0]).unwrap();
        assert_eq!(s.to_csv(), "index,x1,data,coefficient\n0,0.0,2.0,2.0\n");
    }
}
