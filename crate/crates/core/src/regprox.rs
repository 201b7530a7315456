//! Separable regularizers, boxes, and interval-constrained proximal maps.
//!
//! Every feasible set the solvers intersect (trust region, fraction-to-boundary
//! region, shifted bounds) is an axis-aligned box, so each proximal problem
//! splits into independent one-dimensional problems solved in closed form.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::SolverError;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegKind {
    L1,
    L0,
    Zero,
}

/// `h(x) = lambda * sum_i phi(x_i)` over the components in `support`
/// (all components when `support` is `None`).
#[derive(Debug, Clone, PartialEq)]
pub struct Regularizer<T> {
    pub kind: RegKind,
    pub lambda: T,
    pub support: Option<Range<usize>>,
}

impl<T: Scalar> Regularizer<T> {
    pub fn new(kind: RegKind, lambda: T) -> Result<Self, SolverError> {
        if !(lambda >= T::zero()) || !lambda.is_finite() {
            return Err(SolverError::InvalidOptions(format!(
                "regularizer weight must be finite and nonnegative, got {lambda}"
            )));
        }
        Ok(Self {
            kind,
            lambda,
            support: None,
        })
    }

    pub fn l1(lambda: T) -> Self {
        Self::new(RegKind::L1, lambda).expect("valid weight")
    }

    pub fn l0(lambda: T) -> Self {
        Self::new(RegKind::L0, lambda).expect("valid weight")
    }

    pub fn zero() -> Self {
        Self {
            kind: RegKind::Zero,
            lambda: T::zero(),
            support: None,
        }
    }

    /// Restricts the regularizer to a contiguous block of components.
    pub fn with_support(mut self, support: Range<usize>) -> Self {
        self.support = Some(support);
        self
    }

    /// Weight applied to component `i` (zero outside the support).
    #[inline]
    pub fn weight(&self, i: usize) -> T {
        match (&self.kind, &self.support) {
            (RegKind::Zero, _) => T::zero(),
            (_, Some(r)) if !r.contains(&i) => T::zero(),
            _ => self.lambda,
        }
    }

    pub fn is_convex(&self) -> bool {
        !matches!(self.kind, RegKind::L0)
    }

    /// `sum_i phi(x_i)` over the support, i.e. `h(x) / lambda`.
    pub fn unweighted(&self, x: &[T]) -> T {
        let range = self.support.clone().unwrap_or(0..x.len());
        let xs = &x[range];
        match self.kind {
            RegKind::L1 => xs.iter().map(|v| v.abs()).sum(),
            RegKind::L0 => T::from_usize(xs.iter().filter(|v| **v != T::zero()).count())
                .expect("count representable"),
            RegKind::Zero => T::zero(),
        }
    }

    /// `h(x)`.
    pub fn value(&self, x: &[T]) -> T {
        match self.kind {
            RegKind::Zero => T::zero(),
            _ => self.lambda * self.unweighted(x),
        }
    }

    /// `psi(s; x) = h(x + s)`.
    pub fn shifted_value(&self, x: &[T], s: &[T]) -> T {
        let range = self.support.clone().unwrap_or(0..x.len());
        let terms = range.map(|i| x[i] + s[i]);
        match self.kind {
            RegKind::L1 => self.lambda * terms.map(|v| v.abs()).sum::<T>(),
            RegKind::L0 => {
                self.lambda
                    * T::from_usize(terms.filter(|v| *v != T::zero()).count())
                        .expect("count representable")
            }
            RegKind::Zero => T::zero(),
        }
    }

    /// `h(x) - h(x + s)` summed per component, with the L1 terms taken as
    /// `-/+ w s_i` when `x_i` and `x_i + s_i` share a sign, so tiny steps do
    /// not cancel against large `|x_i|`.
    pub fn decrease(&self, x: &[T], s: &[T]) -> T {
        let range = self.support.clone().unwrap_or(0..x.len());
        let z = T::zero();
        match self.kind {
            RegKind::L1 => {
                self.lambda
                    * range
                        .map(|i| {
                            let (a, b) = (x[i], x[i] + s[i]);
                            if a >= z && b >= z {
                                -s[i]
                            } else if a <= z && b <= z {
                                s[i]
                            } else {
                                a.abs() - b.abs()
                            }
                        })
                        .sum::<T>()
            }
            RegKind::L0 => self.value(x) - self.shifted_value(x, s),
            RegKind::Zero => z,
        }
    }

    /// Per-component term `w * phi(t)` with `w = weight(i)`.
    #[inline]
    pub fn component(&self, i: usize, t: T) -> T {
        let w = self.weight(i);
        match self.kind {
            RegKind::L1 => w * t.abs(),
            RegKind::L0 if t != T::zero() => w,
            _ => T::zero(),
        }
    }
}

/// `h(x)` as a free function.
pub fn reg_value<T: Scalar>(h: &Regularizer<T>, x: &[T]) -> T {
    h.value(x)
}

/// `h(x + s)` as a free function.
pub fn shifted_value<T: Scalar>(h: &Regularizer<T>, x: &[T], s: &[T]) -> T {
    h.shifted_value(x, s)
}

/// An axis-aligned box `{ s : lo <= s <= hi }` with possibly infinite ends.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSet<T> {
    pub lo: Vec<T>,
    pub hi: Vec<T>,
}

impl<T: Scalar> IntervalSet<T> {
    pub fn new(lo: Vec<T>, hi: Vec<T>) -> Result<Self, SolverError> {
        if lo.len() != hi.len() {
            return Err(SolverError::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if let Some(index) = lo.iter().zip(&hi).position(|(l, u)| !(l <= u)) {
            return Err(SolverError::EmptyBox { index });
        }
        Ok(Self { lo, hi })
    }

    pub fn full(n: usize) -> Self {
        Self {
            lo: vec![T::neg_infinity(); n],
            hi: vec![T::infinity(); n],
        }
    }

    /// The l-infinity ball of radius `radius`.
    pub fn trust_region(n: usize, radius: T) -> Self {
        Self {
            lo: vec![-radius; n],
            hi: vec![radius; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn intersect(&self, other: &Self) -> Result<Self, SolverError> {
        intersect_boxes(self, other)
    }

    pub fn contains(&self, s: &[T]) -> bool {
        s.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (l, u))| l <= v && v <= u)
    }

    pub fn clamp(&self, s: &[T]) -> Vec<T> {
        s.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&v, (&l, &u))| v.max(l).min(u))
            .collect()
    }
}

/// Componentwise intersection of two boxes.
pub fn intersect_boxes<T: Scalar>(
    a: &IntervalSet<T>,
    b: &IntervalSet<T>,
) -> Result<IntervalSet<T>, SolverError> {
    if a.dim() != b.dim() {
        return Err(SolverError::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let lo = a.lo.iter().zip(&b.lo).map(|(x, y)| x.max(*y)).collect();
    let hi = a.hi.iter().zip(&b.hi).map(|(x, y)| x.min(*y)).collect();
    IntervalSet::new(lo, hi)
}

/// Bound constraints `lower <= x <= upper`; infinite entries mean "no bound".
#[derive(Debug, Clone, PartialEq)]
pub struct BoundBox<T> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Scalar> BoundBox<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self, SolverError> {
        if lower.len() != upper.len() {
            return Err(SolverError::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        for (index, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l < u) || *l == T::infinity() || *u == T::neg_infinity() {
                return Err(SolverError::EmptyBox { index });
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn unbounded(n: usize) -> Self {
        Self {
            lower: vec![T::neg_infinity(); n],
            upper: vec![T::infinity(); n],
        }
    }

    pub fn nonnegative(n: usize) -> Self {
        Self {
            lower: vec![T::zero(); n],
            upper: vec![T::infinity(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    #[inline]
    pub fn has_lower(&self, i: usize) -> bool {
        self.lower[i].is_finite()
    }

    #[inline]
    pub fn has_upper(&self, i: usize) -> bool {
        self.upper[i].is_finite()
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| l <= v && v <= u)
    }

    /// True when every finite-bound gap is strictly positive.
    pub fn strictly_contains(&self, x: &[T]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| l < v && v < u)
    }

    /// Index of the first component whose finite-bound gap is not positive.
    pub fn first_boundary_violation(&self, x: &[T]) -> Option<usize> {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .position(|(v, (l, u))| !(l < v && v < u))
    }

    pub fn project(&self, x: &[T]) -> Vec<T> {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&v, (&l, &u))| v.max(l).min(u))
            .collect()
    }

    /// Smallest finite lower and upper gaps (`+inf` when no such bound exists).
    pub fn min_gaps(&self, x: &[T]) -> (T, T) {
        let mut gl = T::infinity();
        let mut gu = T::infinity();
        for (i, &v) in x.iter().enumerate() {
            if self.has_lower(i) {
                gl = gl.min(v - self.lower[i]);
            }
            if self.has_upper(i) {
                gu = gu.min(self.upper[i] - v);
            }
        }
        (gl, gu)
    }

    /// `-x + [lower, upper]`, the steps keeping `x + s` feasible.
    pub fn shifted(&self, x: &[T]) -> IntervalSet<T> {
        IntervalSet {
            lo: x.iter().zip(&self.lower).map(|(&v, &l)| l - v).collect(),
            hi: x.iter().zip(&self.upper).map(|(&v, &u)| u - v).collect(),
        }
    }
}

/// Steps `s` keeping every finite-bound gap of `x + s` at least `delta` times
/// the smallest current gap on that side.
///
/// With `lower = 0`, `upper = inf` this is `{ s : min_i (x + s)_i >= delta * min_i x_i }`.
/// Bounds are nudged so the guarantee holds for the floating point sum `x + s`.
pub fn fraction_to_boundary_box<T: Scalar>(
    x: &[T],
    delta: T,
    bounds: &BoundBox<T>,
) -> Result<IntervalSet<T>, SolverError> {
    if x.len() != bounds.dim() {
        return Err(SolverError::DimensionMismatch {
            expected: bounds.dim(),
            got: x.len(),
        });
    }
    if let Some(index) = bounds.first_boundary_violation(x) {
        return Err(SolverError::BoundaryPoint { index });
    }
    let (gl, gu) = bounds.min_gaps(x);
    let n = x.len();
    let mut lo = vec![T::neg_infinity(); n];
    let mut hi = vec![T::infinity(); n];
    for i in 0..n {
        if bounds.has_lower(i) {
            let floor = bounds.lower[i] + delta * gl;
            let mut s = floor - x[i];
            for _ in 0..16 {
                if x[i] + s >= floor {
                    break;
                }
                s = s + (floor - (x[i] + s)).max(T::epsilon() * x[i].abs().max(s.abs()));
            }
            lo[i] = s;
        }
        if bounds.has_upper(i) {
            let ceil = bounds.upper[i] - delta * gu;
            let mut s = ceil - x[i];
            for _ in 0..16 {
                if x[i] + s <= ceil {
                    break;
                }
                s = s - ((x[i] + s) - ceil).max(T::epsilon() * x[i].abs().max(s.abs()));
            }
            hi[i] = s;
        }
    }
    IntervalSet::new(lo, hi)
}

/// One-dimensional kernel: argmin over `s in [lo, hi]` of
/// `d/2 (s - q)^2 + w * phi(shift + s)`.
///
/// `d <= 0` is handled by enumerating endpoints and the kink, which requires a
/// bounded interval.
pub fn prox_scalar<T: Scalar>(
    kind: RegKind,
    w: T,
    d: T,
    q: T,
    shift: T,
    lo: T,
    hi: T,
) -> Result<T, SolverError> {
    let clamp = |v: T| v.max(lo).min(hi);
    let kink = -shift;
    let kink_feasible = lo <= kink && kink <= hi;
    let obj = |s: T| {
        let t = shift + s;
        let r = match kind {
            RegKind::L1 => w * t.abs(),
            RegKind::L0 if t != T::zero() => w,
            _ => T::zero(),
        };
        d * (s - q) * (s - q) / T::lit(2.0) + r
    };
    if d > T::zero() {
        if w == T::zero() || kind == RegKind::Zero {
            return Ok(clamp(q));
        }
        return Ok(match kind {
            RegKind::L1 => {
                let tau = w / d;
                let t = q + shift;
                if t > tau {
                    clamp(q - tau)
                } else if t < -tau {
                    clamp(q + tau)
                } else {
                    clamp(kink)
                }
            }
            RegKind::L0 => {
                let a = clamp(q);
                if kink_feasible && obj(kink) <= obj(a) {
                    kink
                } else {
                    a
                }
            }
            RegKind::Zero => unreachable!(),
        });
    }
    if !lo.is_finite() || !hi.is_finite() {
        return Err(SolverError::InvalidOptions(
            "nonpositive curvature requires a bounded interval".into(),
        ));
    }
    // concave or linear pieces: minimum is at an endpoint or at the kink
    let mut best = if kink_feasible && w > T::zero() && kind != RegKind::Zero {
        kink
    } else {
        lo
    };
    for c in [lo, hi] {
        if obj(c) < obj(best) {
            best = c;
        }
    }
    Ok(best)
}

/// Componentwise `argmin_{s in box} sum_i d_i/2 (s_i - q_i)^2 + h(s)`.
pub fn prox_separable<T: Scalar>(
    h: &Regularizer<T>,
    d: &[T],
    q: &[T],
    bx: &IntervalSet<T>,
) -> Result<Vec<T>, SolverError> {
    let zeros = vec![T::zero(); q.len()];
    iprox_shifted(h, d, q, &zeros, bx)
}

/// Componentwise `argmin_{s in box} sum_i d_i/2 (s_i - q_i)^2 + h(x + s)`.
///
/// Ties in the `L0` case go to the step that zeroes `x_i + s_i`.
pub fn iprox_shifted<T: Scalar>(
    h: &Regularizer<T>,
    d: &[T],
    q: &[T],
    x: &[T],
    bx: &IntervalSet<T>,
) -> Result<Vec<T>, SolverError> {
    let n = q.len();
    for (len, _) in [(d.len(), 0), (x.len(), 1), (bx.dim(), 2)] {
        if len != n {
            return Err(SolverError::DimensionMismatch {
                expected: n,
                got: len,
            });
        }
    }
    (0..n)
        .map(|i| {
            if !(bx.lo[i] <= bx.hi[i]) {
                return Err(SolverError::EmptyBox { index: i });
            }
            prox_scalar(h.kind, h.weight(i), d[i], q[i], x[i], bx.lo[i], bx.hi[i])
        })
        .collect()
}

/// Same as [`iprox_shifted`] with a scalar curvature `d` shared by all components.
pub fn iprox_uniform<T: Scalar>(
    h: &Regularizer<T>,
    d: T,
    q: &[T],
    x: &[T],
    bx: &IntervalSet<T>,
) -> Result<Vec<T>, SolverError> {
    let n = q.len();
    if x.len() != n || bx.dim() != n {
        return Err(SolverError::DimensionMismatch {
            expected: n,
            got: x.len().min(bx.dim()),
        });
    }
    (0..n)
        .map(|i| {
            if !(bx.lo[i] <= bx.hi[i]) {
                return Err(SolverError::EmptyBox { index: i });
            }
            prox_scalar(h.kind, h.weight(i), d, q[i], x[i], bx.lo[i], bx.hi[i])
        })
        .collect()
}
