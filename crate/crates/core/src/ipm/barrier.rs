//! Logarithmic barrier for two-sided bounds.
//!
//! Terms for infinite bounds are dropped, so unbounded components carry no
//! barrier, no multiplier and no barrier curvature.

use crate::error::SolverError;
use crate::ipm::dual::DualEstimate;
use crate::regprox::BoundBox;
use crate::Scalar;

/// `-mu sum log(x - l) - mu sum log(u - x)`, `+inf` outside the open box.
pub fn barrier_value<T: Scalar>(mu: T, x: &[T], bounds: &BoundBox<T>) -> T {
    let mut acc = T::zero();
    for (i, &xi) in x.iter().enumerate() {
        if bounds.has_lower(i) {
            let gap = xi - bounds.lower[i];
            if !(gap > T::zero()) {
                return T::infinity();
            }
            acc = acc - gap.ln();
        }
        if bounds.has_upper(i) {
            let gap = bounds.upper[i] - xi;
            if !(gap > T::zero()) {
                return T::infinity();
            }
            acc = acc - gap.ln();
        }
    }
    mu * acc
}

/// `-mu / (x - l) + mu / (u - x)` per component.
pub fn barrier_grad<T: Scalar>(mu: T, x: &[T], bounds: &BoundBox<T>) -> Result<Vec<T>, SolverError> {
    x.iter()
        .enumerate()
        .map(|(i, &xi)| {
            let mut gi = T::zero();
            if bounds.has_lower(i) {
                let gap = xi - bounds.lower[i];
                if !(gap > T::zero()) {
                    return Err(SolverError::BoundaryPoint { index: i });
                }
                gi = gi - mu / gap;
            }
            if bounds.has_upper(i) {
                let gap = bounds.upper[i] - xi;
                if !(gap > T::zero()) {
                    return Err(SolverError::BoundaryPoint { index: i });
                }
                gi = gi + mu / gap;
            }
            Ok(gi)
        })
        .collect()
}

/// `|| (X - L) z_l - mu e ; (U - X) z_u - mu e ||_2` over finite sides.
pub fn complementarity_residual<T: Scalar>(
    x: &[T],
    z: &DualEstimate<T>,
    mu: T,
    bounds: &BoundBox<T>,
) -> T {
    let mut acc = T::zero();
    for (i, &xi) in x.iter().enumerate() {
        if bounds.has_lower(i) {
            let r = (xi - bounds.lower[i]) * z.lower[i] - mu;
            acc = acc + r * r;
        }
        if bounds.has_upper(i) {
            let r = (bounds.upper[i] - xi) * z.upper[i] - mu;
            acc = acc + r * r;
        }
    }
    acc.sqrt()
}

/// Capped primal-dual curvature `min(z_l / (x - l), kappa) + min(z_u / (u - x), kappa)`.
pub fn capped_curvature<T: Scalar>(
    x: &[T],
    z: &DualEstimate<T>,
    bounds: &BoundBox<T>,
    kappa: T,
) -> Vec<T> {
    x.iter()
        .enumerate()
        .map(|(i, &xi)| {
            let mut t = T::zero();
            if bounds.has_lower(i) {
                t = t + (z.lower[i] / (xi - bounds.lower[i])).min(kappa);
            }
            if bounds.has_upper(i) {
                t = t + (z.upper[i] / (bounds.upper[i] - xi)).min(kappa);
            }
            t
        })
        .collect()
}
