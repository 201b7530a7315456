//! Nonnegative basis pursuit denoise
//! `min 1/2 ||A x - b||^2 + lambda ||x||_1  s.t.  x >= 0`
//! with `A` having orthonormal rows and `b = A x_star + noise`.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::SolverError;
use crate::linalg::{dot, norm2};
use crate::oracle::SmoothObjective;
use crate::regprox::{BoundBox, Regularizer};

/// How the noise level `0.01` is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseLevel {
    /// Variance `0.01`, standard deviation `0.1`.
    Variance,
    /// Standard deviation `0.01`.
    #[default]
    StdDev,
}

impl NoiseLevel {
    pub fn std_dev(self) -> f64 {
        match self {
            NoiseLevel::Variance => 0.1,
            NoiseLevel::StdDev => 0.01,
        }
    }
}

pub struct LeastSquares {
    pub m: usize,
    pub n: usize,
    /// Row-major `m x n`.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl LeastSquares {
    fn residual(&self, x: &[f64]) -> Vec<f64> {
        (0..self.m)
            .map(|i| dot(&self.a[i * self.n..(i + 1) * self.n], x) - self.b[i])
            .collect()
    }

    /// `A' v`.
    pub fn at_times(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, &vi) in v.iter().enumerate() {
            for (o, &aij) in out.iter_mut().zip(&self.a[i * self.n..(i + 1) * self.n]) {
                *o += aij * vi;
            }
        }
        out
    }
}

impl SmoothObjective<f64> for LeastSquares {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> Result<f64, SolverError> {
        let r = norm2(&self.residual(x));
        Ok(0.5 * r * r)
    }

    fn gradient(&self, x: &[f64], g: &mut [f64]) -> Result<(), SolverError> {
        g.copy_from_slice(&self.at_times(&self.residual(x)));
        Ok(())
    }
}

pub struct BpdnData {
    pub objective: LeastSquares,
    pub h: Regularizer<f64>,
    pub bounds: BoundBox<f64>,
    pub x0: Vec<f64>,
    pub x_star: Vec<f64>,
}

/// Orthonormalizes the rows of a row-major `m x n` matrix in place with two
/// passes of modified Gram-Schmidt.
fn orthonormalize_rows(a: &mut [f64], m: usize, n: usize) {
    for i in 0..m {
        for _ in 0..2 {
            for k in 0..i {
                let (done, rest) = a.split_at_mut(i * n);
                let qk = &done[k * n..(k + 1) * n];
                let ri = &mut rest[..n];
                let c = dot(qk, ri);
                for (r, &q) in ri.iter_mut().zip(qk) {
                    *r -= c * q;
                }
            }
        }
        let row = &mut a[i * n..(i + 1) * n];
        let nr = norm2(row);
        row.iter_mut().for_each(|v| *v /= nr);
    }
}

/// Default starting value of every component.
pub const DEFAULT_X0: f64 = 0.1;

pub fn gen_bpdn(
    m: usize,
    n: usize,
    n_spikes: usize,
    noise: NoiseLevel,
    seed: u64,
) -> Result<BpdnData, SolverError> {
    if m == 0 || m >= n || n_spikes > n {
        return Err(SolverError::InvalidOptions(format!(
            "bpdn needs 0 < m < n and n_spikes <= n, got m={m}, n={n}, n_spikes={n_spikes}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a: Vec<f64> = (0..m * n).map(|_| rng.sample(StandardNormal)).collect();
    orthonormalize_rows(&mut a, m, n);
    let mut x_star = vec![0.0; n];
    for j in sample(&mut rng, n, n_spikes) {
        x_star[j] = 1.0;
    }
    let sd = noise.std_dev();
    let b: Vec<f64> = (0..m)
        .map(|i| {
            let e: f64 = rng.sample(StandardNormal);
            dot(&a[i * n..(i + 1) * n], &x_star) + sd * e
        })
        .collect();
    let objective = LeastSquares { m, n, a, b };
    let lambda = objective
        .at_times(&objective.b)
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        / 10.0;
    Ok(BpdnData {
        objective,
        h: Regularizer::new(crate::regprox::RegKind::L1, lambda)?,
        bounds: BoundBox::nonnegative(n),
        x0: vec![DEFAULT_X0; n],
        x_star,
    })
}
