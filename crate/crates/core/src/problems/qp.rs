//! Box-constrained sparse quadratic program
//! `min c'x + 1/2 x'Hx + lambda ||x||_1  s.t.  -e - t_l <= x <= e + t_u`.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};

use crate::error::SolverError;
use crate::linalg::dot;
use crate::oracle::SmoothObjective;
use crate::regprox::{BoundBox, Regularizer};

/// Symmetric matrix in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<f64>,
}

impl CsrMatrix {
    /// Builds an `n x n` matrix from triplets, summing duplicates.
    pub fn from_triplets(n: usize, mut t: Vec<(usize, usize, f64)>) -> Self {
        t.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0; n + 1];
        let mut col = Vec::with_capacity(t.len());
        let mut val: Vec<f64> = Vec::with_capacity(t.len());
        let mut last = None;
        for (i, j, v) in t {
            if last == Some((i, j)) {
                *val.last_mut().unwrap() += v;
                continue;
            }
            last = Some((i, j));
            row_ptr[i + 1] += 1;
            col.push(j);
            val.push(v);
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, col, val }
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn mul_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let r = self.row_ptr[i]..self.row_ptr[i + 1];
            *o = self.col[r.clone()]
                .iter()
                .zip(&self.val[r])
                .map(|(&j, &v)| v * x[j])
                .sum();
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col[r.clone()]
            .iter()
            .position(|&c| c == j)
            .map(|p| self.val[r.start + p])
            .unwrap_or(0.0)
    }
}

pub struct QuadraticObjective {
    pub c: Vec<f64>,
    pub hess: CsrMatrix,
}

impl SmoothObjective<f64> for QuadraticObjective {
    fn dim(&self) -> usize {
        self.c.len()
    }

    fn value(&self, x: &[f64]) -> Result<f64, SolverError> {
        let mut hx = vec![0.0; x.len()];
        self.hess.mul_into(x, &mut hx);
        Ok(dot(&self.c, x) + 0.5 * dot(x, &hx))
    }

    fn gradient(&self, x: &[f64], g: &mut [f64]) -> Result<(), SolverError> {
        self.hess.mul_into(x, g);
        for (gi, &ci) in g.iter_mut().zip(&self.c) {
            *gi += ci;
        }
        Ok(())
    }
}

pub struct QpData {
    pub objective: QuadraticObjective,
    pub h: Regularizer<f64>,
    pub bounds: BoundBox<f64>,
    pub x0: Vec<f64>,
}

/// `A` has each entry nonzero with probability `p` (standard normal values),
/// `H = A + A'`, `c ~ N(0, I)`, `t_l, t_u ~ U(0, 1)`; `x0` is the box midpoint.
pub fn gen_qp(n: usize, p: f64, lambda: f64, seed: u64) -> Result<QpData, SolverError> {
    if n == 0 || !(p > 0.0 && p <= 1.0) {
        return Err(SolverError::InvalidOptions(format!("qp needs n >= 1 and p in (0, 1], got n={n}, p={p}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per_row = Binomial::new(n as u64, p).map_err(|e| SolverError::InvalidOptions(e.to_string()))?;
    let mut trip = Vec::new();
    for i in 0..n {
        let k = per_row.sample(&mut rng) as usize;
        let mut cols = sample(&mut rng, n, k).into_vec();
        cols.sort_unstable();
        for j in cols {
            let v: f64 = rng.sample(StandardNormal);
            trip.push((i, j, v));
            trip.push((j, i, v));
        }
    }
    let hess = CsrMatrix::from_triplets(n, trip);
    let c: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let lower: Vec<f64> = (0..n).map(|_| -1.0 - rng.random::<f64>()).collect();
    let upper: Vec<f64> = (0..n).map(|_| 1.0 + rng.random::<f64>()).collect();
    let x0 = lower.iter().zip(&upper).map(|(&l, &u)| 0.5 * (l + u)).collect();
    Ok(QpData {
        objective: QuadraticObjective { c, hess },
        h: Regularizer::new(crate::regprox::RegKind::L1, lambda)?,
        bounds: BoundBox::new(lower, upper)?,
        x0,
    })
}
