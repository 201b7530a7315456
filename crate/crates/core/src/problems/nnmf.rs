//! Sparse nonnegative matrix factorization
//! `min 1/2 ||A - W H||_F^2 + lambda ||vec H||_1  s.t.  W, H >= 0`.
//!
//! Variables are `(vec W, vec H)` with column-major `vec`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::SolverError;
use crate::oracle::SmoothObjective;
use crate::regprox::{BoundBox, Regularizer};

pub struct NnmfObjective {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    /// Column-major `m x n` data.
    pub a: Vec<f64>,
}

impl NnmfObjective {
    /// `W H - A`, column-major.
    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let (m, n, k) = (self.m, self.n, self.k);
        let (w, h) = x.split_at(m * k);
        let mut r: Vec<f64> = self.a.iter().map(|&v| -v).collect();
        for j in 0..n {
            for l in 0..k {
                let hlj = h[l + k * j];
                if hlj == 0.0 {
                    continue;
                }
                let wcol = &w[m * l..m * (l + 1)];
                for (ri, &wi) in r[m * j..m * (j + 1)].iter_mut().zip(wcol) {
                    *ri += wi * hlj;
                }
            }
        }
        r
    }
}

impl SmoothObjective<f64> for NnmfObjective {
    fn dim(&self) -> usize {
        self.k * (self.m + self.n)
    }

    fn value(&self, x: &[f64]) -> Result<f64, SolverError> {
        Ok(0.5 * self.residual(x).iter().map(|v| v * v).sum::<f64>())
    }

    fn gradient(&self, x: &[f64], g: &mut [f64]) -> Result<(), SolverError> {
        let (m, n, k) = (self.m, self.n, self.k);
        let r = self.residual(x);
        let (w, h) = x.split_at(m * k);
        let (gw, gh) = g.split_at_mut(m * k);
        // grad W = R H', grad H = W' R
        gw.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..n {
            let rcol = &r[m * j..m * (j + 1)];
            for l in 0..k {
                let hlj = h[l + k * j];
                let wcol = &w[m * l..m * (l + 1)];
                let mut acc = 0.0;
                for (gi, (&ri, &wi)) in gw[m * l..m * (l + 1)].iter_mut().zip(rcol.iter().zip(wcol)) {
                    *gi += ri * hlj;
                    acc += wi * ri;
                }
                gh[l + k * j] = acc;
            }
        }
        Ok(())
    }
}

pub struct NnmfData {
    pub objective: NnmfObjective,
    pub h: Regularizer<f64>,
    pub bounds: BoundBox<f64>,
    pub x0: Vec<f64>,
}

/// Columns of `A` are `center + 0.1 N(0, I)` around one of `k` centers drawn
/// from `U(0, 1)^m`, with negative entries set to zero. `x0 ~ U(0.1, 1)`.
pub fn gen_nnmf(m: usize, n: usize, k: usize, lambda: f64, seed: u64) -> Result<NnmfData, SolverError> {
    if k == 0 || k >= m.min(n) {
        return Err(SolverError::InvalidOptions(format!(
            "nnmf needs 0 < k < min(m, n), got m={m}, n={n}, k={k}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..m).map(|_| rng.random::<f64>()).collect())
        .collect();
    let mut a = Vec::with_capacity(m * n);
    for _ in 0..n {
        let c = &centers[rng.random_range(0..k)];
        for &ci in c {
            let noise: f64 = rng.sample(StandardNormal);
            a.push((ci + 0.1 * noise).max(0.0));
        }
    }
    let dim = k * (m + n);
    let x0 = (0..dim).map(|_| rng.random_range(0.1..1.0)).collect();
    Ok(NnmfData {
        objective: NnmfObjective { m, n, k, a },
        h: Regularizer::new(crate::regprox::RegKind::L1, lambda)?.with_support(m * k..dim),
        bounds: BoundBox::nonnegative(dim),
        x0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_factorization_has_zero_value_and_gradient() {
        let (m, n, k) = (3, 4, 2);
        let w = [1.0, 0.5, 0.0, 0.2, 1.0, 3.0];
        let h = [1.0, 0.0, 0.3, 0.7, 2.0, 1.0, 0.0, 0.5];
        let mut a = vec![0.0; m * n];
        for j in 0..n {
            for i in 0..m {
                a[i + m * j] = (0..k).map(|l| w[i + m * l] * h[l + k * j]).sum();
            }
        }
        let obj = NnmfObjective { m, n, k, a };
        let x: Vec<f64> = w.iter().chain(&h).copied().collect();
        assert!(obj.value(&x).unwrap().abs() < 1e-28);
        let mut g = vec![1.0; x.len()];
        obj.gradient(&x, &mut g).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn data_is_nonnegative_and_regularizer_covers_h_block() {
        let d = gen_nnmf(10, 8, 3, 0.1, 4).unwrap();
        assert!(d.objective.a.iter().all(|&v| v >= 0.0));
        assert_eq!(d.h.weight(29), 0.0);
        assert_eq!(d.h.weight(30), 0.1);
        assert_eq!(d.x0.len(), 54);
        assert!(d.x0.iter().all(|&v| v >= 0.1));
    }
}
