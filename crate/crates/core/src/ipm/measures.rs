//! Proximal-gradient steps and criticality measures of the barrier subproblem.

use crate::error::SolverError;
use crate::linalg::{dot, norm2};
use crate::regprox::{fraction_to_boundary_box, iprox_uniform, BoundBox, IntervalSet, Regularizer};
use crate::trust_region::with_radius;
use crate::Scalar;

/// A first-order step and the model decrease it certifies.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstOrderStep<T> {
    pub step: Vec<T>,
    /// `h(x) - g's - h(x + s)`, the decrease of the linear model plus `h`.
    pub xi: T,
}

impl<T: Scalar> FirstOrderStep<T> {
    /// `sqrt(xi / nu)`.
    pub fn measure(&self, nu: T) -> T {
        (self.xi.max(T::zero()) / nu).sqrt()
    }

    /// Whether `xi >= 1/(2 nu) ||s||^2` up to rounding.
    pub fn satisfies_decrease_bound(&self, nu: T, hx: T) -> bool {
        let n2 = norm2(&self.step);
        let lower = n2 * n2 / (T::lit(2.0) * nu);
        self.xi >= lower - T::lit(1e-10) * (T::one() + lower.abs() + hx.abs())
    }
}

/// `Delta B  intersect  R_delta(x)`.
pub fn step_box<T: Scalar>(
    x: &[T],
    radius: T,
    delta_frac: T,
    bounds: &BoundBox<T>,
) -> Result<IntervalSet<T>, SolverError> {
    let ftb = fraction_to_boundary_box(x, delta_frac, bounds)?;
    Ok(with_radius(&ftb, radius))
}

/// Proximal-gradient step with gradient `g` and step length `nu` over `bx`.
pub fn prox_gradient_step<T: Scalar>(
    x: &[T],
    g: &[T],
    nu: T,
    h: &Regularizer<T>,
    bx: &IntervalSet<T>,
) -> Result<FirstOrderStep<T>, SolverError> {
    let q: Vec<T> = g.iter().map(|&gi| -nu * gi).collect();
    let step = iprox_uniform(h, T::one() / nu, &q, x, bx)?;
    let xi = h.decrease(x, &step) - dot(g, &step);
    Ok(FirstOrderStep { step, xi })
}

/// `grad f - mu / (x - l) + mu / (u - x)`.
pub fn barrier_model_gradient<T: Scalar>(
    grad_f: &[T],
    mu: T,
    x: &[T],
    bounds: &BoundBox<T>,
) -> Result<Vec<T>, SolverError> {
    let gb = super::barrier::barrier_grad(mu, x, bounds)?;
    Ok(grad_f.iter().zip(&gb).map(|(&a, &b)| a + b).collect())
}

/// `grad f - z_l + z_u`.
pub fn lagrangian_gradient<T: Scalar>(grad_f: &[T], z: &super::DualEstimate<T>) -> Vec<T> {
    grad_f
        .iter()
        .zip(z.lower.iter().zip(&z.upper))
        .map(|(&g, (&zl, &zu))| g - zl + zu)
        .collect()
}

/// Cauchy step `s1` of the barrier subproblem and `xi_cp`.
///
/// The linear model uses `grad f(x) - mu X^-1 e` (two-sided analog for boxes)
/// and the step is confined to `Delta B  intersect  R_delta(x)`.
#[allow(clippy::too_many_arguments)]
pub fn cauchy_step<T: Scalar>(
    x: &[T],
    grad_f: &[T],
    mu: T,
    nu: T,
    radius: T,
    delta_frac: T,
    h: &Regularizer<T>,
    bounds: &BoundBox<T>,
) -> Result<FirstOrderStep<T>, SolverError> {
    let g = barrier_model_gradient(grad_f, mu, x, bounds)?;
    let bx = step_box(x, radius, delta_frac, bounds)?;
    prox_gradient_step(x, &g, nu, h, &bx)
}

/// Step `s_L` and measure `xi_L` built on the Lagrangian gradient `grad f - z`.
#[allow(clippy::too_many_arguments)]
pub fn xi_l<T: Scalar>(
    x: &[T],
    z: &super::DualEstimate<T>,
    grad_f: &[T],
    nu: T,
    radius: T,
    delta_frac: T,
    h: &Regularizer<T>,
    bounds: &BoundBox<T>,
) -> Result<FirstOrderStep<T>, SolverError> {
    let g = lagrangian_gradient(grad_f, z);
    let bx = step_box(x, radius, delta_frac, bounds)?;
    prox_gradient_step(x, &g, nu, h, &bx)
}
