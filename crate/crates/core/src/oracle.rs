//! Smooth objective oracles and evaluation bookkeeping.

use crate::error::SolverError;
use crate::Scalar;

/// A smooth function `f` with gradient.
///
/// `value` may return `+inf` to signal that `x` lies outside the region where
/// `f` can be evaluated (for instance when an ODE solve blows up); the solvers
/// treat such trial points as rejected.
pub trait SmoothObjective<T: Scalar>: Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[T]) -> Result<T, SolverError>;

    fn gradient(&self, x: &[T], g: &mut [T]) -> Result<(), SolverError>;
}

/// Adapts a pair of closures to [`SmoothObjective`].
pub struct FnObjective<F, G> {
    dim: usize,
    value: F,
    gradient: G,
}

impl<F, G> FnObjective<F, G> {
    pub fn new(dim: usize, value: F, gradient: G) -> Self {
        Self {
            dim,
            value,
            gradient,
        }
    }
}

impl<T, F, G> SmoothObjective<T> for FnObjective<F, G>
where
    T: Scalar,
    F: Fn(&[T]) -> T + Sync,
    G: Fn(&[T], &mut [T]) + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[T]) -> Result<T, SolverError> {
        Ok((self.value)(x))
    }

    fn gradient(&self, x: &[T], g: &mut [T]) -> Result<(), SolverError> {
        (self.gradient)(x, g);
        Ok(())
    }
}

/// Counts evaluations of a borrowed objective for the duration of one solve.
pub struct Counted<'a, T: Scalar> {
    inner: &'a dyn SmoothObjective<T>,
    pub n_f: usize,
    pub n_grad: usize,
}

impl<'a, T: Scalar> Counted<'a, T> {
    pub fn new(inner: &'a dyn SmoothObjective<T>) -> Self {
        Self {
            inner,
            n_f: 0,
            n_grad: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn value(&mut self, x: &[T]) -> Result<T, SolverError> {
        self.n_f += 1;
        self.inner.value(x)
    }

    pub fn gradient(&mut self, x: &[T], g: &mut [T]) -> Result<(), SolverError> {
        self.n_grad += 1;
        self.inner.gradient(x, g)
    }

    /// Evaluates without touching the counters (used for reporting only).
    pub fn value_uncounted(&self, x: &[T]) -> Result<T, SolverError> {
        self.inner.value(x)
    }
}

/// Mutable evaluation interface used by the iteration kernels; implemented by
/// counted oracles and by the quadratic trust-region models.
pub trait Objective<T: Scalar> {
    fn value(&mut self, x: &[T]) -> Result<T, SolverError>;

    fn gradient(&mut self, x: &[T], g: &mut [T]) -> Result<(), SolverError>;

    /// Called with `f + h` at every point where the gradient was evaluated.
    fn record(&mut self, _objective: T) {}

    /// Objective evaluations charged against the budget so far.
    fn evaluations(&self) -> usize {
        0
    }
}

impl<T: Scalar> Objective<T> for Counted<'_, T> {
    fn value(&mut self, x: &[T]) -> Result<T, SolverError> {
        Counted::value(self, x)
    }

    fn gradient(&mut self, x: &[T], g: &mut [T]) -> Result<(), SolverError> {
        Counted::gradient(self, x, g)
    }

    fn evaluations(&self) -> usize {
        self.n_f
    }
}

/// A counted oracle that also keeps the `(n_grad, f + h)` trace.
pub struct Traced<'a, T: Scalar> {
    pub counted: Counted<'a, T>,
    pub trace: Vec<(usize, T)>,
}

impl<'a, T: Scalar> Traced<'a, T> {
    pub fn new(inner: &'a dyn SmoothObjective<T>) -> Self {
        Self {
            counted: Counted::new(inner),
            trace: Vec::new(),
        }
    }
}

impl<T: Scalar> Objective<T> for Traced<'_, T> {
    fn value(&mut self, x: &[T]) -> Result<T, SolverError> {
        self.counted.value(x)
    }

    fn gradient(&mut self, x: &[T], g: &mut [T]) -> Result<(), SolverError> {
        self.counted.gradient(x, g)
    }

    fn record(&mut self, objective: T) {
        self.trace.push((self.counted.n_grad, objective));
    }

    fn evaluations(&self) -> usize {
        self.counted.n_f
    }
}
