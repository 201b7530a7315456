//! Crossover from the final barrier iterate to an exactly complementary pair,
//! and KKT residuals for diagnostics.

use crate::ipm::DualEstimate;
use crate::regprox::{BoundBox, RegKind, Regularizer};
use crate::Scalar;

/// Applies, per bounded side:
///
/// - gap below `sqrt(mu)`: snap `x` to the bound,
/// - multiplier below `sqrt(mu)`: set it to zero,
/// - gap and multiplier both below `mu^(1/4)`: zero both.
///
/// A side left with a positive gap and a positive multiplier afterwards gets
/// its multiplier zeroed, so `gap * z = 0` holds exactly on every side.
pub fn crossover<T: Scalar>(
    x: &[T],
    z: &DualEstimate<T>,
    mu: T,
    bounds: &BoundBox<T>,
) -> (Vec<T>, DualEstimate<T>) {
    let mut x = bounds.project(x);
    let mut z = z.clone();
    let r2 = mu.sqrt();
    let r4 = r2.sqrt();
    for i in 0..x.len() {
        if bounds.has_lower(i) {
            let gap = x[i] - bounds.lower[i];
            let zi = z.lower[i];
            if gap < r2 || (gap < r4 && zi < r4) {
                x[i] = bounds.lower[i];
            }
            if zi < r2 || (gap < r4 && zi < r4) {
                z.lower[i] = T::zero();
            }
        }
        if bounds.has_upper(i) {
            let gap = bounds.upper[i] - x[i];
            let zi = z.upper[i];
            if gap < r2 || (gap < r4 && zi < r4) {
                x[i] = bounds.upper[i];
            }
            if zi < r2 || (gap < r4 && zi < r4) {
                z.upper[i] = T::zero();
            }
        }
    }
    for i in 0..x.len() {
        if bounds.has_lower(i) {
            if x[i] - bounds.lower[i] != T::zero() {
                z.lower[i] = T::zero();
            }
        } else {
            z.lower[i] = T::zero();
        }
        if bounds.has_upper(i) {
            if bounds.upper[i] - x[i] != T::zero() {
                z.upper[i] = T::zero();
            }
        } else {
            z.upper[i] = T::zero();
        }
    }
    (x, z)
}

/// Number of sides where `x` is infeasible, `z < 0`, or `gap * z != 0`.
pub fn crossover_violations<T: Scalar>(x: &[T], z: &DualEstimate<T>, bounds: &BoundBox<T>) -> usize {
    let mut bad = 0;
    for i in 0..x.len() {
        if bounds.has_lower(i) {
            let gap = x[i] - bounds.lower[i];
            if gap < T::zero() || z.lower[i] < T::zero() || gap * z.lower[i] != T::zero() {
                bad += 1;
            }
        }
        if bounds.has_upper(i) {
            let gap = bounds.upper[i] - x[i];
            if gap < T::zero() || z.upper[i] < T::zero() || gap * z.upper[i] != T::zero() {
                bad += 1;
            }
        }
    }
    bad
}

/// `(max_i gap_i z_i, dist(-(grad f - z_l + z_u), subdifferential of h at x))`.
pub fn kkt_residuals<T: Scalar>(
    x: &[T],
    z: &DualEstimate<T>,
    grad_f: &[T],
    h: &Regularizer<T>,
    bounds: &BoundBox<T>,
) -> (T, T) {
    let mut eps_p = T::zero();
    let mut acc = T::zero();
    for i in 0..x.len() {
        if bounds.has_lower(i) {
            eps_p = eps_p.max((x[i] - bounds.lower[i]) * z.lower[i]);
        }
        if bounds.has_upper(i) {
            eps_p = eps_p.max((bounds.upper[i] - x[i]) * z.upper[i]);
        }
        let v = -(grad_f[i] - z.lower[i] + z.upper[i]);
        let w = h.weight(i);
        let d = match h.kind {
            _ if w == T::zero() => v.abs(),
            RegKind::Zero => v.abs(),
            RegKind::L1 => {
                if x[i] > T::zero() {
                    (v - w).abs()
                } else if x[i] < T::zero() {
                    (v + w).abs()
                } else {
                    (v.abs() - w).max(T::zero())
                }
            }
            RegKind::L0 => {
                if x[i] == T::zero() {
                    T::zero()
                } else {
                    v.abs()
                }
            }
        };
        acc = acc + d * d;
    }
    (eps_p, acc.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lower_only(z: f64) -> DualEstimate<f64> {
        DualEstimate {
            lower: vec![z],
            upper: vec![0.0],
        }
    }

    #[test]
    fn snaps_small_gap() {
        let b = BoundBox::nonnegative(1);
        let (x, z) = crossover(&[1e-9], &lower_only(0.5), 1e-8, &b);
        assert_eq!(x, vec![0.0]);
        assert_eq!(z.lower, vec![0.5]);
        assert_eq!(crossover_violations(&x, &z, &b), 0);
    }

    #[test]
    fn zeroes_small_multiplier() {
        let b = BoundBox::nonnegative(1);
        let (x, z) = crossover(&[1.0], &lower_only(1e-9), 1e-8, &b);
        assert_eq!(x, vec![1.0]);
        assert_eq!(z.lower, vec![0.0]);
    }

    #[test]
    fn zeroes_both_when_both_moderately_small() {
        let b = BoundBox::nonnegative(1);
        let (x, z) = crossover(&[1e-3], &lower_only(1e-3), 1e-8, &b);
        assert_eq!(x, vec![0.0]);
        assert_eq!(z.lower, vec![0.0]);
    }

    #[test]
    fn ambiguous_pair_keeps_primal_and_drops_multiplier() {
        let b = BoundBox::nonnegative(1);
        let (x, z) = crossover(&[0.5], &lower_only(0.5), 1e-8, &b);
        assert_eq!(x, vec![0.5]);
        assert_eq!(z.lower, vec![0.0]);
        assert_eq!(crossover_violations(&x, &z, &b), 0);
    }

    #[test]
    fn upper_bound_snap() {
        let b = BoundBox::new(vec![0.0], vec![1.0]).unwrap();
        let z = DualEstimate {
            lower: vec![1e-7],
            upper: vec![2.0],
        };
        let (x, z) = crossover(&[1.0 - 1e-6], &z, 1e-8, &b);
        assert_eq!(x, vec![1.0]);
        assert_eq!(z.lower, vec![0.0]);
        assert_eq!(z.upper, vec![2.0]);
    }

    #[test]
    fn kkt_residual_examples() {
        let b = BoundBox::nonnegative(1);
        let h0 = Regularizer::zero();
        // f = x at x = 0, z = 1
        assert_eq!(kkt_residuals(&[0.0], &lower_only(1.0), &[1.0], &h0, &b), (0.0, 0.0));
        // f = (x - 1)^2 / 2 at x = 1
        assert_eq!(kkt_residuals(&[1.0], &lower_only(0.0), &[0.0], &h0, &b), (0.0, 0.0));
        let h = Regularizer::l1(0.5);
        let free = BoundBox::unbounded(1);
        let none = lower_only(0.0);
        // f = x at x = 0: distance from -1 to [-0.5, 0.5]
        assert_eq!(kkt_residuals(&[0.0], &none, &[1.0], &h, &free).1, 0.5);
        // f = x at x = 1: subdifferential is {0.5}
        assert_eq!(kkt_residuals(&[1.0], &none, &[1.0], &h, &free).1, 1.5);
        let l0 = Regularizer::l0(1.0);
        assert_eq!(kkt_residuals(&[0.0], &none, &[3.0], &l0, &free).1, 0.0);
        assert_eq!(kkt_residuals(&[2.0], &none, &[3.0], &l0, &free).1, 3.0);
    }
}
