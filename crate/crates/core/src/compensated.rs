//! Error-free transformations and double-double accumulation.
//!
//! Kernel-basis coefficients of smooth kernels grow like the inverse of the smallest
//! Gram eigenvalue while the interpolant itself stays O(1), so plain `f64` sums of
//! `α_j k(x_j, x)` lose most of their digits to cancellation. Fits therefore keep the
//! coefficients as unevaluated pairs `hi + lo` and evaluate with compensated sums.

#[inline]
pub(crate) fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
pub(crate) fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Double-double accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Accumulator {
    hi: f64,
    lo: f64,
}

impl Accumulator {
    #[inline]
    pub(crate) fn new(init: f64) -> Self {
        Accumulator { hi: init, lo: 0.0 }
    }

    #[inline]
    pub(crate) fn add(&mut self, v: f64) {
        let (s, e) = two_sum(self.hi, v);
        self.hi = s;
        self.lo += e;
    }

    /// Adds the exact product `a·b`.
    #[inline]
    pub(crate) fn add_product(&mut self, a: f64, b: f64) {
        let (p, pe) = two_prod(a, b);
        let (s, se) = two_sum(self.hi, p);
        self.hi = s;
        self.lo += pe + se;
    }

    #[inline]
    pub(crate) fn value(self) -> f64 {
        self.hi + self.lo
    }

    /// Renormalized `(hi, lo)` pair.
    #[inline]
    pub(crate) fn pair(self) -> (f64, f64) {
        let s = self.hi + self.lo;
        (s, self.lo - (s - self.hi))
    }
}

/// `Σ (hi_j + lo_j) w_j`, accurate as if computed in twice the working precision.
#[inline]
pub(crate) fn dot_pair(hi: &[f64], lo: &[f64], w: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = Accumulator::default();
    for ((h, l), w) in hi.iter().zip(lo).zip(w) {
        acc.add_product(*h, w);
        acc.add_product(*l, w);
    }
    acc.value()
}
