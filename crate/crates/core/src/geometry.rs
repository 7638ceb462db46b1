//! Point sets, fill and separation distances, and nested quasi-uniform designs.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::EvalGrid;
use crate::kernel::{distance, distance_sq, DISTINCTNESS_TOLERANCE};

/// Axis-aligned box `[a₁,b₁] × … × [a_N,b_N]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::invalid("box bounds must be non-empty and of equal length"));
        }
        if lower
            .iter()
            .zip(&upper)
            .any(|(a, b)| !(a.is_finite() && b.is_finite() && a < b))
        {
            return Err(Error::invalid(format!(
                "box needs finite lower < upper on every axis, got {lower:?} / {upper:?}"
            )));
        }
        Ok(BoxDomain { lower, upper })
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![a], vec![b])
    }

    /// `[0, 1]^dim`.
    pub fn unit(dim: usize) -> Self {
        BoxDomain {
            lower: vec![0.0; dim],
            upper: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn diameter(&self) -> f64 {
        distance(&self.lower, &self.upper)
    }

    pub fn volume(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (a, b))| a <= x && x <= b)
    }

    /// Maps a point of `[0,1]^N` affinely into the box.
    fn map_unit(&self, u: &[f64], out: &mut Vec<f64>) {
        out.extend(
            u.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .map(|(t, (a, b))| a + t * (b - a)),
        );
    }
}

/// Ordered list of pairwise distinct points in a box.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    domain: BoxDomain,
    coords: Vec<f64>,
}

impl PointSet {
    /// Validated construction: every point must lie in the (closed) box and no two
    /// points may be closer than the distinctness tolerance.
    pub fn new(domain: BoxDomain, coords: Vec<f64>) -> Result<Self> {
        let set = Self::from_coords_unchecked(domain, coords);
        set.validate()?;
        Ok(set)
    }

    pub fn from_points(domain: BoxDomain, points: &[Vec<f64>]) -> Result<Self> {
        let dim = domain.dim();
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: p.len(),
            });
        }
        Self::new(domain, points.concat())
    }

    /// Construction without the distinctness and containment checks. The coordinate
    /// count must still be a multiple of the dimension.
    pub fn from_coords_unchecked(domain: BoxDomain, coords: Vec<f64>) -> Self {
        assert_eq!(coords.len() % domain.dim(), 0, "ragged coordinate list");
        PointSet { domain, coords }
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.dim();
        if !self.coords.len().is_multiple_of(dim) {
            return Err(Error::invalid("ragged coordinate list"));
        }
        if let Some(p) = self.iter().find(|p| !self.domain.contains(p)) {
            return Err(Error::invalid(format!("point {p:?} lies outside the domain box")));
        }
        let tol = DISTINCTNESS_TOLERANCE * self.domain.diameter();
        if let Some((i, j, d)) = self.closest_pair() {
            if d < tol {
                return Err(Error::DuplicateNodes {
                    first: i,
                    second: j,
                    distance: d,
                });
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.coords[i * d..(i + 1) * d]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim())
    }

    /// The first `n` points.
    pub fn prefix(&self, n: usize) -> PointSet {
        let n = n.min(self.len());
        PointSet {
            domain: self.domain.clone(),
            coords: self.coords[..n * self.dim()].to_vec(),
        }
    }

    /// Indices and distance of the closest pair, lowest indices first on ties.
    fn closest_pair(&self) -> Option<(usize, usize, f64)> {
        let n = self.len();
        if n < 2 {
            return None;
        }
        if self.dim() == 1 {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| self.coords[a].total_cmp(&self.coords[b]).then(a.cmp(&b)));
            return order
                .windows(2)
                .map(|w| {
                    let (i, j) = (w[0].min(w[1]), w[0].max(w[1]));
                    (i, j, (self.coords[w[1]] - self.coords[w[0]]).abs())
                })
                .min_by(|a, b| a.2.total_cmp(&b.2).then((a.0, a.1).cmp(&(b.0, b.1))));
        }
        let mut best = (0, 1, f64::INFINITY);
        for i in 0..n {
            let xi = self.point(i);
            for j in (i + 1)..n {
                let d = distance_sq(xi, self.point(j));
                if d < best.2 {
                    best = (i, j, d);
                }
            }
        }
        Some((best.0, best.1, best.2.sqrt()))
    }
}

/// `q_X = ½ min_{i≠j} ‖x_i − x_j‖`.
pub fn separation_distance(points: &PointSet) -> Result<f64> {
    points
        .closest_pair()
        .map(|(_, _, d)| 0.5 * d)
        .ok_or(Error::TooFewPoints {
            quantity: "separation distance",
            required: 2,
            got: points.len(),
        })
}

/// Exact fill distance of a 1D node set in `[a, b]`:
/// `max{x₁ − a, max_i (x_{i+1} − x_i)/2, b − x_n}` over the sorted nodes.
pub fn fill_distance_interval(points: &PointSet, a: f64, b: f64) -> Result<f64> {
    if points.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: points.dim(),
        });
    }
    if points.is_empty() {
        return Err(Error::TooFewPoints {
            quantity: "fill distance",
            required: 1,
            got: 0,
        });
    }
    let mut xs = points.coords().to_vec();
    xs.sort_by(f64::total_cmp);
    let interior = xs.windows(2).map(|w| 0.5 * (w[1] - w[0])).fold(0.0f64, f64::max);
    Ok((xs[0] - a).max(b - xs[xs.len() - 1]).max(interior))
}

/// `max_{p ∈ probe} min_{x ∈ X} ‖p − x‖`.
///
/// A lower bound of the true fill distance that is off by at most
/// [`EvalGrid::covering_radius`] (half the probe cell diagonal).
pub fn fill_distance_grid(points: &PointSet, probe: &EvalGrid) -> Result<f64> {
    if points.is_empty() || probe.is_empty() {
        return Err(Error::TooFewPoints {
            quantity: "fill distance",
            required: 1,
            got: points.len().min(probe.len()),
        });
    }
    if points.dim() != probe.dim() {
        return Err(Error::DimensionMismatch {
            expected: points.dim(),
            got: probe.dim(),
        });
    }
    let max_sq = probe
        .coords()
        .par_chunks(probe.dim())
        .map(|p| points.iter().map(|x| distance_sq(p, x)).fold(f64::INFINITY, f64::min))
        .reduce(|| 0.0, f64::max);
    Ok(max_sq.sqrt())
}

/// `ρ = h / q`.
pub fn mesh_ratio(points: &PointSet, fill: f64) -> Result<f64> {
    Ok(fill / separation_distance(points)?)
}

/// How fill distance is measured for a design level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FillMethod {
    /// Closed-form interval formula; 1D only.
    Exact,
    /// Probe grid with the given number of points per axis.
    Probe(usize),
    /// Exact in 1D, probe grid with the given density otherwise.
    Auto(usize),
}

impl Default for FillMethod {
    fn default() -> Self {
        FillMethod::Auto(DEFAULT_PROBE_PER_AXIS)
    }
}

pub const DEFAULT_PROBE_PER_AXIS: usize = 1001;

impl FillMethod {
    pub fn fill_distance(self, points: &PointSet) -> Result<f64> {
        let dom = points.domain();
        match self {
            FillMethod::Exact => fill_distance_interval(points, dom.lower()[0], dom.upper()[0]),
            FillMethod::Auto(_) if points.dim() == 1 => fill_distance_interval(points, dom.lower()[0], dom.upper()[0]),
            FillMethod::Probe(m) | FillMethod::Auto(m) => fill_distance_grid(points, &EvalGrid::new(dom.clone(), m)?),
        }
    }
}

/// Geometry of one design level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelGeometry {
    pub n: usize,
    pub fill: f64,
    pub separation: f64,
    pub mesh_ratio: f64,
}

impl LevelGeometry {
    pub fn measure(points: &PointSet, method: FillMethod) -> Result<Self> {
        let fill = method.fill_distance(points)?;
        let separation = separation_distance(points)?;
        Ok(LevelGeometry {
            n: points.len(),
            fill,
            separation,
            mesh_ratio: fill / separation,
        })
    }
}

/// Nested node sets `X₁ ⊂ X₂ ⊂ …` realized as prefixes of one ordered master list.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedDesign {
    master: PointSet,
    levels: Vec<LevelGeometry>,
}

impl NestedDesign {
    /// `counts` must be strictly increasing, at least 2 and at most the master length.
    pub fn new(master: PointSet, counts: &[usize], method: FillMethod) -> Result<Self> {
        check_counts(counts, master.len())?;
        let levels = counts
            .iter()
            .map(|&n| LevelGeometry::measure(&master.prefix(n), method).map_err(|e| e.at_level(n)))
            .collect::<Result<Vec<_>>>()?;
        Ok(NestedDesign { master, levels })
    }

    pub fn master(&self) -> &PointSet {
        &self.master
    }

    pub fn levels(&self) -> &[LevelGeometry] {
        &self.levels
    }

    pub fn counts(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.n).collect()
    }

    pub fn level_points(&self, i: usize) -> PointSet {
        self.master.prefix(self.levels[i].n)
    }

    /// Largest per-level mesh ratio.
    pub fn mesh_ratio_bound(&self) -> f64 {
        self.levels.iter().map(|l| l.mesh_ratio).fold(1.0, f64::max)
    }
}

fn check_counts(counts: &[usize], available: usize) -> Result<()> {
    if counts.is_empty() {
        return Err(Error::invalid("at least one level count is required"));
    }
    if counts[0] < 2 {
        return Err(Error::invalid("level counts must be at least 2"));
    }
    if counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(format!(
            "level counts must be strictly increasing, got {counts:?}"
        )));
    }
    if counts[counts.len() - 1] > available {
        return Err(Error::invalid(format!(
            "level count {} exceeds the {available} available points",
            counts[counts.len() - 1]
        )));
    }
    Ok(())
}

/// Geometric greedy selection: start from `candidates[seed_index]` and repeatedly add
/// the candidate farthest from the points chosen so far (lowest index on ties).
///
/// Returns the `m` selected points in selection order, so every prefix is itself a
/// greedy design.
pub fn geometric_greedy(candidates: &PointSet, m: usize, seed_index: usize) -> Result<PointSet> {
    let total = candidates.len();
    if m == 0 || m > total {
        return Err(Error::invalid(format!(
            "cannot select {m} points from {total} candidates"
        )));
    }
    if seed_index >= total {
        return Err(Error::invalid(format!(
            "seed index {seed_index} out of range for {total} candidates"
        )));
    }
    let dim = candidates.dim();
    let mut coords = Vec::with_capacity(m * dim);
    let mut min_dist = vec![f64::INFINITY; total];
    let mut next = seed_index;
    for step in 0..m {
        let chosen = candidates.point(next).to_vec();
        coords.extend_from_slice(&chosen);
        if step + 1 == m {
            break;
        }
        min_dist
            .par_iter_mut()
            .enumerate()
            .for_each(|(j, d)| *d = d.min(distance_sq(candidates.point(j), &chosen)));
        let mut best = (0usize, f64::NEG_INFINITY);
        for (j, &d) in min_dist.iter().enumerate() {
            if d > best.1 {
                best = (j, d);
            }
        }
        next = best.0;
    }
    Ok(PointSet::from_coords_unchecked(candidates.domain().clone(), coords))
}

/// Index of the candidate nearest to `target` (lowest index on ties).
pub fn nearest_index(points: &PointSet, target: &[f64]) -> Option<usize> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| (i, distance_sq(p, target)))
        .fold(None, |best: Option<(usize, f64)>, (i, d)| match best {
            Some((_, bd)) if bd <= d => best,
            _ => Some((i, d)),
        })
        .map(|(i, _)| i)
}

/// Which of the interval sampling thresholds `h ≤ (b−a)/(100τ²)` and
/// `h ≤ (b−a)/(1200τ²)` hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SamplingCondition {
    None,
    Weak100,
    Strong1200,
}

impl SamplingCondition {
    pub fn label(self) -> &'static str {
        match self {
            SamplingCondition::None => "none",
            SamplingCondition::Weak100 => "weak-100",
            SamplingCondition::Strong1200 => "strong-1200",
        }
    }
}

impl fmt::Display for SamplingCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

pub fn sampling_condition(h: f64, tau: f64, a: f64, b: f64) -> SamplingCondition {
    if h <= (b - a) / (1200.0 * tau * tau) {
        SamplingCondition::Strong1200
    } else if h <= (b - a) / (100.0 * tau * tau) {
        SamplingCondition::Weak100
    } else {
        SamplingCondition::None
    }
}

/// Candidate generation schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateScheme {
    UniformRandom {
        seed: u64,
    },
    /// Halton sequence in the first `N` prime bases, starting at index 1.
    LowDiscrepancy,
    /// `m^N` interior points `a + (i + 1)(b − a)/(m + 1)`; the count must be a perfect
    /// `N`-th power.
    TensorGrid,
}

impl CandidateScheme {
    pub fn name(self) -> &'static str {
        match self {
            CandidateScheme::UniformRandom { .. } => "uniform_random",
            CandidateScheme::LowDiscrepancy => "low_discrepancy",
            CandidateScheme::TensorGrid => "tensor_grid",
        }
    }
}

impl FromStr for CandidateScheme {
    type Err = Error;

    /// Parses the scheme name; a random scheme parses with seed 0.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform_random" => Ok(CandidateScheme::UniformRandom { seed: 0 }),
            "low_discrepancy" => Ok(CandidateScheme::LowDiscrepancy),
            "tensor_grid" => Ok(CandidateScheme::TensorGrid),
            _ => Err(Error::invalid(format!(
                "unknown candidate scheme `{s}` (expected uniform_random, low_discrepancy or tensor_grid)"
            ))),
        }
    }
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += (index % base) as f64 * f;
        index /= base;
        f *= inv;
    }
    r
}

pub fn generate_candidates(domain: &BoxDomain, count: usize, scheme: CandidateScheme) -> Result<PointSet> {
    if count == 0 {
        return Err(Error::invalid("candidate count must be at least 1"));
    }
    let dim = domain.dim();
    let mut coords = Vec::with_capacity(count * dim);
    let mut unit = vec![0.0; dim];
    match scheme {
        CandidateScheme::UniformRandom { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..count {
                for u in unit.iter_mut() {
                    *u = loop {
                        let v: f64 = rng.gen();
                        if v > 0.0 {
                            break v;
                        }
                    };
                }
                domain.map_unit(&unit, &mut coords);
            }
        }
        CandidateScheme::LowDiscrepancy => {
            if dim > PRIMES.len() {
                return Err(Error::invalid(format!(
                    "low-discrepancy candidates support at most {} dimensions",
                    PRIMES.len()
                )));
            }
            for i in 1..=count as u64 {
                for (u, &p) in unit.iter_mut().zip(&PRIMES) {
                    *u = radical_inverse(i, p);
                }
                domain.map_unit(&unit, &mut coords);
            }
        }
        CandidateScheme::TensorGrid => {
            let m = (count as f64).powf(1.0 / dim as f64).round() as usize;
            if m.checked_pow(dim as u32) != Some(count) {
                return Err(Error::invalid(format!(
                    "tensor grid count {count} is not a perfect {dim}-th power"
                )));
            }
            let mut idx = vec![0usize; dim];
            for _ in 0..count {
                for (u, &i) in unit.iter_mut().zip(&idx) {
                    *u = (i + 1) as f64 / (m + 1) as f64;
                }
                domain.map_unit(&unit, &mut coords);
                for d in (0..dim).rev() {
                    idx[d] += 1;
                    if idx[d] < m {
                        break;
                    }
                    idx[d] = 0;
                }
            }
        }
    }
    PointSet::new(domain.clone(), coords)
}

/// Interior equispaced nodes `a + i(b − a)/(n + 1)`, `i = 1..n`.
pub fn equispaced(a: f64, b: f64, n: usize) -> Result<PointSet> {
    let dom = BoxDomain::interval(a, b)?;
    let coords = (1..=n).map(|i| a + i as f64 * (b - a) / (n + 1) as f64).collect();
    PointSet::new(dom, coords)
}

/// Base-2 van der Corput ordering of dyadic points in `(a, b)`.
///
/// The prefix of length `2^k − 1` is exactly the equispaced set `a + i(b − a)/2^k`, so
/// prefixes give nested equispaced levels.
pub fn dyadic_sequence(a: f64, b: f64, count: usize) -> Result<PointSet> {
    let dom = BoxDomain::interval(a, b)?;
    let coords = (1..=count as u64)
        .map(|i| a + radical_inverse(i, 2) * (b - a))
        .collect();
    PointSet::new(dom, coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn line(xs: &[f64]) -> PointSet {
        PointSet::new(BoxDomain::interval(0.0, 1.0).unwrap(), xs.to_vec()).unwrap()
    }

    #[test]
    fn separation_examples() {
        assert_eq!(separation_distance(&line(&[0.0, 1.0])).unwrap(), 0.5);
        assert_relative_eq!(
            separation_distance(&line(&[0.2, 0.5, 0.9])).unwrap(),
            0.15,
            epsilon = 1e-15
        );
        assert!(matches!(
            separation_distance(&line(&[0.3])),
            Err(Error::TooFewPoints { .. })
        ));
        assert!(matches!(
            PointSet::new(BoxDomain::unit(1), vec![0.3, 0.7, 0.3]),
            Err(Error::DuplicateNodes {
                first: 0,
                second: 2,
                ..
            })
        ));
    }

    #[test]
    fn separation_2d_brute_force() {
        let p = PointSet::new(BoxDomain::unit(2), vec![0.1, 0.1, 0.9, 0.9, 0.2, 0.3, 0.5, 0.5]).unwrap();
        let d = ((0.1f64).powi(2) + (0.2f64).powi(2)).sqrt();
        assert_relative_eq!(separation_distance(&p).unwrap(), 0.5 * d, epsilon = 1e-15);
    }

    #[test]
    fn interval_fill_examples() {
        assert_eq!(fill_distance_interval(&line(&[0.5]), 0.0, 1.0).unwrap(), 0.5);
        assert_relative_eq!(
            fill_distance_interval(&line(&[0.9, 0.2, 0.5]), 0.0, 1.0).unwrap(),
            0.2,
            epsilon = 1e-15
        );
        for n in [1usize, 4, 31] {
            let p = equispaced(0.0, 1.0, n).unwrap();
            assert_relative_eq!(
                fill_distance_interval(&p, 0.0, 1.0).unwrap(),
                1.0 / (n + 1) as f64,
                epsilon = 1e-15
            );
        }
        let empty = PointSet::from_coords_unchecked(BoxDomain::unit(1), vec![]);
        assert!(fill_distance_interval(&empty, 0.0, 1.0).is_err());
    }

    #[test]
    fn grid_fill_examples() {
        let g = EvalGrid::new(BoxDomain::unit(1), 11).unwrap();
        let same = PointSet::new(BoxDomain::unit(1), g.coords().to_vec()).unwrap();
        assert_eq!(fill_distance_grid(&same, &g).unwrap(), 0.0);

        let fine = EvalGrid::new(BoxDomain::unit(1), 1_000_001).unwrap();
        let h = fill_distance_grid(&line(&[0.2, 0.5, 0.9]), &fine).unwrap();
        assert!((h - 0.2).abs() <= 1e-6, "{h}");

        let corners = PointSet::new(BoxDomain::unit(2), vec![0., 0., 0., 1., 1., 0., 1., 1.]).unwrap();
        let probe = EvalGrid::new(BoxDomain::unit(2), 1001).unwrap();
        let h = fill_distance_grid(&corners, &probe).unwrap();
        assert!((h - 0.5f64.sqrt()).abs() <= 2e-3, "{h}");
    }

    #[test]
    fn mesh_ratio_examples() {
        let p = line(&[0.2, 0.5, 0.9]);
        let h = fill_distance_interval(&p, 0.0, 1.0).unwrap();
        assert_relative_eq!(mesh_ratio(&p, h).unwrap(), 0.2 / 0.15, epsilon = 1e-14);
        let p = line(&[0.0, 1.0]);
        assert_eq!(
            mesh_ratio(&p, fill_distance_interval(&p, 0.0, 1.0).unwrap()).unwrap(),
            1.0
        );
        let p = equispaced(0.0, 1.0, 20).unwrap();
        let h = fill_distance_interval(&p, 0.0, 1.0).unwrap();
        assert_relative_eq!(mesh_ratio(&p, h).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn greedy_center_then_corner() {
        let c = PointSet::new(BoxDomain::unit(2), vec![0.5, 0.5, 0., 0., 1., 0., 0., 1., 1., 1.]).unwrap();
        let g = geometric_greedy(&c, 2, 0).unwrap();
        assert_eq!(g.point(0), &[0.5, 0.5]);
        assert_eq!(g.point(1), &[0.0, 0.0]);
        let single = geometric_greedy(&c, 1, 3).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single.point(0), &[0.0, 1.0]);
        assert!(geometric_greedy(&c, 6, 0).is_err());
    }

    #[test]
    fn greedy_on_low_discrepancy_pool_is_quasi_uniform() {
        let dom = BoxDomain::unit(1);
        let pool = generate_candidates(&dom, 10_000, CandidateScheme::LowDiscrepancy).unwrap();
        let seed = nearest_index(&pool, &[0.5]).unwrap();
        let master = geometric_greedy(&pool, 64, seed).unwrap();
        let counts: Vec<usize> = (8..=64).collect();
        let design = NestedDesign::new(master, &counts, FillMethod::Exact).unwrap();
        for lvl in design.levels() {
            assert!(lvl.mesh_ratio <= 2.5, "n={} rho={}", lvl.n, lvl.mesh_ratio);
        }
    }

    #[test]
    fn greedy_beats_random_subsets() {
        let dom = BoxDomain::unit(2);
        let probe = EvalGrid::new(dom.clone(), 201).unwrap();
        let pool = generate_candidates(&dom, 100, CandidateScheme::LowDiscrepancy).unwrap();
        let mut greedy_sum = 0.0;
        let mut random_sum = 0.0;
        for seed in 0..10u64 {
            let start = (seed as usize * 7) % pool.len();
            let g = geometric_greedy(&pool, 50, start).unwrap();
            greedy_sum += fill_distance_grid(&g, &probe).unwrap();
            let r = generate_candidates(&dom, 50, CandidateScheme::UniformRandom { seed }).unwrap();
            random_sum += fill_distance_grid(&r, &probe).unwrap();
        }
        assert!(greedy_sum < random_sum, "{greedy_sum} vs {random_sum}");
    }

    #[test]
    fn greedy_is_stable_under_candidate_permutation() {
        let dom = BoxDomain::unit(2);
        let pool = generate_candidates(&dom, 500, CandidateScheme::UniformRandom { seed: 3 }).unwrap();
        let n = pool.len();
        let perm: Vec<usize> = (0..n).map(|i| (i * 37 + 11) % n).collect();
        let shuffled: Vec<f64> = perm.iter().flat_map(|&i| pool.point(i).to_vec()).collect();
        let shuffled = PointSet::new(dom, shuffled).unwrap();
        let seed = 17;
        let seed_shuffled = perm.iter().position(|&i| i == seed).unwrap();
        let a = geometric_greedy(&pool, 60, seed).unwrap();
        let b = geometric_greedy(&shuffled, 60, seed_shuffled).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sampling_thresholds() {
        let (a, b, tau) = (0.0, 2.0, 2.5);
        assert_eq!(
            sampling_condition((b - a) / (100.0 * tau * tau), tau, a, b),
            SamplingCondition::Weak100
        );
        assert_eq!(
            sampling_condition((b - a) / (1200.0 * tau * tau), tau, a, b),
            SamplingCondition::Strong1200
        );
        assert_eq!(
            sampling_condition((b - a) / (50.0 * tau * tau), tau, a, b),
            SamplingCondition::None
        );
    }

    #[test]
    fn candidate_schemes() {
        let dom = BoxDomain::unit(1);
        let g = generate_candidates(&dom, 3, CandidateScheme::TensorGrid).unwrap();
        assert_eq!(g.coords(), &[0.25, 0.5, 0.75]);
        let a = generate_candidates(&BoxDomain::unit(2), 50, CandidateScheme::UniformRandom { seed: 9 }).unwrap();
        let b = generate_candidates(&BoxDomain::unit(2), 50, CandidateScheme::UniformRandom { seed: 9 }).unwrap();
        assert_eq!(a, b);
        assert!(generate_candidates(&BoxDomain::unit(2), 10, CandidateScheme::TensorGrid).is_err());
        assert_eq!(
            generate_candidates(&BoxDomain::unit(2), 16, CandidateScheme::TensorGrid)
                .unwrap()
                .len(),
            16
        );
    }

    #[test]
    fn dyadic_prefixes_are_equispaced() {
        let d = dyadic_sequence(0.0, 1.0, 255).unwrap();
        for k in 1..=8u32 {
            let n = (1usize << k) - 1;
            let mut xs = d.prefix(n).coords().to_vec();
            xs.sort_by(f64::total_cmp);
            let expect = equispaced(0.0, 1.0, n).unwrap();
            assert_eq!(xs, expect.coords());
        }
    }

    #[test]
    fn design_rejects_bad_counts() {
        let d = dyadic_sequence(0.0, 1.0, 15).unwrap();
        assert!(NestedDesign::new(d.clone(), &[4, 4], FillMethod::Exact).is_err());
        assert!(NestedDesign::new(d.clone(), &[4, 16], FillMethod::Exact).is_err());
        assert!(NestedDesign::new(d, &[3, 7, 15], FillMethod::Exact).is_ok());
    }

    proptest! {
        #[test]
        fn nested_prefixes_are_monotone(xs in proptest::collection::vec(0.001f64..0.999, 3..40)) {
            let Ok(p) = PointSet::new(BoxDomain::unit(1), xs) else { return Ok(()) };
            let mut prev_h = f64::INFINITY;
            let mut prev_q = f64::INFINITY;
            for n in 2..=p.len() {
                let pre = p.prefix(n);
                let h = fill_distance_interval(&pre, 0.0, 1.0).unwrap();
                let q = separation_distance(&pre).unwrap();
                prop_assert!(h <= prev_h);
                prop_assert!(q <= prev_q);
                prop_assert!(q <= h);
                prev_h = h;
                prev_q = q;
            }
        }
    }
}
