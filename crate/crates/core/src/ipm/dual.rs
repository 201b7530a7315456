//! Bound multiplier estimates and their safeguarded update.

use crate::error::SolverError;
use crate::regprox::BoundBox;
use crate::Scalar;

/// Multipliers of the lower and upper bounds; entries for infinite bounds stay zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DualEstimate<T> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Scalar> DualEstimate<T> {
    /// `z = e` on every finite side.
    pub fn ones(bounds: &BoundBox<T>) -> Self {
        let n = bounds.dim();
        Self {
            lower: (0..n)
                .map(|i| if bounds.has_lower(i) { T::one() } else { T::zero() })
                .collect(),
            upper: (0..n)
                .map(|i| if bounds.has_upper(i) { T::one() } else { T::zero() })
                .collect(),
        }
    }

    /// `mu / gap` on every finite side.
    pub fn central(x: &[T], mu: T, bounds: &BoundBox<T>) -> Self {
        let n = bounds.dim();
        Self {
            lower: (0..n)
                .map(|i| {
                    if bounds.has_lower(i) {
                        mu / (x[i] - bounds.lower[i])
                    } else {
                        T::zero()
                    }
                })
                .collect(),
            upper: (0..n)
                .map(|i| {
                    if bounds.has_upper(i) {
                        mu / (bounds.upper[i] - x[i])
                    } else {
                        T::zero()
                    }
                })
                .collect(),
        }
    }

    /// `z_l - z_u`, the net multiplier entering the Lagrangian gradient.
    pub fn net(&self) -> Vec<T> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| l - u)
            .collect()
    }
}

/// Safeguard interval for one bounded side:
/// `[kzl min(1, z_old, mu/gap_new), max(kzu, z_old, kzu/mu, kzu mu/gap_new)]`.
pub fn safeguard_interval<T: Scalar>(z_old: T, gap_new: T, mu: T, kzl: T, kzu: T) -> (T, T) {
    let central = mu / gap_new;
    let lo = kzl * T::one().min(z_old).min(central);
    let hi = kzu.max(z_old).max(kzu / mu).max(kzu * central);
    (lo, hi)
}

fn side_update<T: Scalar>(
    gap_old: T,
    gap_new: T,
    gap_step: T,
    z_old: T,
    mu: T,
    kzl: T,
    kzu: T,
) -> T {
    let z_hat = mu / gap_old - z_old * gap_step / gap_old;
    let (lo, hi) = safeguard_interval(z_old, gap_new, mu, kzl, kzu);
    if z_hat.is_nan() {
        return lo;
    }
    z_hat.max(lo).min(hi)
}

/// Linearized complementarity update `z_hat = mu G^-1 e - G^-1 Z dgap` per bounded
/// side, projected componentwise into the safeguard interval.
///
/// For the lower side `dgap = s`; for the upper side `dgap = -s`.
#[allow(clippy::too_many_arguments)]
pub fn dual_update<T: Scalar>(
    x_new: &[T],
    x_old: &[T],
    z_old: &DualEstimate<T>,
    s: &[T],
    mu: T,
    kappa_zul: T,
    kappa_zuu: T,
    bounds: &BoundBox<T>,
) -> Result<DualEstimate<T>, SolverError> {
    let mut z = z_old.clone();
    for i in 0..x_new.len() {
        if bounds.has_lower(i) {
            let go = x_old[i] - bounds.lower[i];
            let gn = x_new[i] - bounds.lower[i];
            if !(go > T::zero() && gn > T::zero()) {
                return Err(SolverError::BoundaryPoint { index: i });
            }
            z.lower[i] = side_update(go, gn, s[i], z_old.lower[i], mu, kappa_zul, kappa_zuu);
        }
        if bounds.has_upper(i) {
            let go = bounds.upper[i] - x_old[i];
            let gn = bounds.upper[i] - x_new[i];
            if !(go > T::zero() && gn > T::zero()) {
                return Err(SolverError::BoundaryPoint { index: i });
            }
            z.upper[i] = side_update(go, gn, -s[i], z_old.upper[i], mu, kappa_zul, kappa_zuu);
        }
    }
    Ok(z)
}

/// Number of finite sides where `z_new` lies outside its safeguard interval.
pub fn safeguard_violations<T: Scalar>(
    x_new: &[T],
    z_old: &DualEstimate<T>,
    z_new: &DualEstimate<T>,
    mu: T,
    kappa_zul: T,
    kappa_zuu: T,
    bounds: &BoundBox<T>,
) -> usize {
    let mut bad = 0;
    for i in 0..x_new.len() {
        if bounds.has_lower(i) {
            let (lo, hi) =
                safeguard_interval(z_old.lower[i], x_new[i] - bounds.lower[i], mu, kappa_zul, kappa_zuu);
            let z = z_new.lower[i];
            if !(z >= lo && z <= hi && z > T::zero()) {
                bad += 1;
            }
        }
        if bounds.has_upper(i) {
            let (lo, hi) =
                safeguard_interval(z_old.upper[i], bounds.upper[i] - x_new[i], mu, kappa_zul, kappa_zuu);
            let z = z_new.upper[i];
            if !(z >= lo && z <= hi && z > T::zero()) {
                bad += 1;
            }
        }
    }
    bad
}
