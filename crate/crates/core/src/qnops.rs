//! Hessian approximations used inside the trust-region models.
//!
//! All kinds start from the identity. Limited-memory BFGS and SR1 keep the
//! last `memory` accepted `(s, y)` pairs and apply `B v` through the unrolled
//! product form; the spectral diagonal keeps a single `sigma * I`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::linalg::{axpy, dot, norm2};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QnKind {
    Lbfgs,
    Lsr1,
    SpectralDiag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateStatus {
    Accepted,
    Skipped,
}

#[derive(Debug, Clone)]
pub struct QuasiNewtonOp<T> {
    kind: QnKind,
    memory: usize,
    dim: usize,
    pairs: VecDeque<(Vec<T>, Vec<T>)>,
    /// LBFGS: `(B_i s_i, s_i' B_i s_i, y_i' s_i)`; LSR1: `(r_i, r_i' s_i, unused)`.
    terms: Vec<(Vec<T>, Vec<T>, T, T)>,
    sigma: T,
    skipped: usize,
    pub eps_curv: T,
    pub eps_sr1: T,
    pub sigma_min: T,
    pub sigma_max: T,
}

impl<T: Scalar> QuasiNewtonOp<T> {
    pub const DEFAULT_MEMORY: usize = 5;

    pub fn new(kind: QnKind, dim: usize, memory: usize) -> Self {
        Self {
            kind,
            memory: memory.max(1),
            dim,
            pairs: VecDeque::new(),
            terms: Vec::new(),
            sigma: T::one(),
            skipped: 0,
            eps_curv: T::lit(1e-8),
            eps_sr1: T::lit(1e-8),
            sigma_min: T::lit(1e-6),
            sigma_max: T::lit(1e12),
        }
    }

    pub fn lbfgs(dim: usize, memory: usize) -> Self {
        Self::new(QnKind::Lbfgs, dim, memory)
    }

    pub fn lsr1(dim: usize, memory: usize) -> Self {
        Self::new(QnKind::Lsr1, dim, memory)
    }

    pub fn spectral(dim: usize) -> Self {
        Self::new(QnKind::SpectralDiag, dim, 1)
    }

    pub fn kind(&self) -> QnKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn stored_pairs(&self) -> usize {
        self.pairs.len()
    }

    pub fn skipped_updates(&self) -> usize {
        self.skipped
    }

    /// Current diagonal value (only meaningful for `SpectralDiag`).
    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn reset(&mut self) {
        self.pairs.clear();
        self.terms.clear();
        self.sigma = T::one();
    }

    pub fn update(&mut self, s: &[T], y: &[T]) -> UpdateStatus {
        debug_assert_eq!(s.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        let ss = dot(s, s);
        if !(ss > T::zero()) {
            self.skipped += 1;
            return UpdateStatus::Skipped;
        }
        match self.kind {
            QnKind::SpectralDiag => {
                let sy = dot(s, y);
                let ratio = sy / ss;
                self.sigma = if ratio.is_finite() {
                    ratio.max(self.sigma_min).min(self.sigma_max)
                } else {
                    self.sigma_max
                };
                UpdateStatus::Accepted
            }
            QnKind::Lbfgs => {
                let sy = dot(s, y);
                if !(sy > self.eps_curv * ss.sqrt() * norm2(y)) {
                    self.skipped += 1;
                    return UpdateStatus::Skipped;
                }
                self.push(s, y);
                UpdateStatus::Accepted
            }
            QnKind::Lsr1 => {
                let bs = self.apply(s);
                let r: Vec<T> = y.iter().zip(&bs).map(|(&a, &b)| a - b).collect();
                let rs = dot(&r, s);
                if !(rs.abs() > self.eps_sr1 * ss.sqrt() * norm2(&r)) {
                    self.skipped += 1;
                    return UpdateStatus::Skipped;
                }
                self.push(s, y);
                UpdateStatus::Accepted
            }
        }
    }

    fn push(&mut self, s: &[T], y: &[T]) {
        self.pairs.push_back((s.to_vec(), y.to_vec()));
        while self.pairs.len() > self.memory {
            self.pairs.pop_front();
        }
        self.rebuild();
    }

    /// Recomputes the product terms from the stored pairs, oldest first.
    fn rebuild(&mut self) {
        self.terms.clear();
        let pairs: Vec<_> = self.pairs.iter().cloned().collect();
        let mut kept = VecDeque::new();
        for (s, y) in pairs {
            let bs = self.apply(&s);
            match self.kind {
                QnKind::Lbfgs => {
                    let sbs = dot(&s, &bs);
                    let ys = dot(&y, &s);
                    if sbs > T::zero() && ys > T::zero() {
                        self.terms.push((bs, y.clone(), sbs, ys));
                        kept.push_back((s, y));
                    }
                }
                QnKind::Lsr1 => {
                    let r: Vec<T> = y.iter().zip(&bs).map(|(&a, &b)| a - b).collect();
                    let rs = dot(&r, &s);
                    if rs.abs() > self.eps_sr1 * norm2(&s) * norm2(&r) {
                        self.terms.push((r, Vec::new(), rs, T::zero()));
                        kept.push_back((s, y));
                    }
                }
                QnKind::SpectralDiag => unreachable!(),
            }
        }
        self.pairs = kept;
    }

    /// `B v`.
    pub fn apply(&self, v: &[T]) -> Vec<T> {
        let mut out = v.to_vec();
        self.apply_into(v, &mut out);
        out
    }

    /// Writes `B v` into `out`.
    pub fn apply_into(&self, v: &[T], out: &mut [T]) {
        debug_assert_eq!(v.len(), out.len());
        match self.kind {
            QnKind::SpectralDiag => {
                for (o, &vi) in out.iter_mut().zip(v) {
                    *o = self.sigma * vi;
                }
            }
            QnKind::Lbfgs => {
                out.copy_from_slice(v);
                for (bs, y, sbs, ys) in &self.terms {
                    axpy(-dot(bs, v) / *sbs, bs, out);
                    axpy(dot(y, v) / *ys, y, out);
                }
            }
            QnKind::Lsr1 => {
                out.copy_from_slice(v);
                for (r, _, rs, _) in &self.terms {
                    axpy(dot(r, v) / *rs, r, out);
                }
            }
        }
    }

    /// Diagonal used by the closed-form diagonal steps.
    pub fn diagonal(&self) -> Vec<T> {
        match self.kind {
            QnKind::SpectralDiag => vec![self.sigma; self.dim],
            _ => {
                let mut e = vec![T::zero(); self.dim];
                (0..self.dim)
                    .map(|i| {
                        e[i] = T::one();
                        let b = self.apply(&e)[i];
                        e[i] = T::zero();
                        b
                    })
                    .collect()
            }
        }
    }

    /// Estimate of the spectral norm `||B||_2`.
    ///
    /// Exact for the spectral diagonal and the identity; otherwise 20 steps of
    /// the power method from a fixed pseudo-random start.
    pub fn norm_estimate(&self) -> T {
        match self.kind {
            QnKind::SpectralDiag => self.sigma.abs(),
            _ if self.terms.is_empty() => T::one(),
            _ => {
                let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
                let mut v: Vec<T> = (0..self.dim)
                    .map(|_| {
                        state = state
                            .wrapping_mul(6364136223846793005)
                            .wrapping_add(1442695040888963407);
                        T::from_u64(state >> 11).unwrap() / T::lit(9007199254740992.0)
                            - T::lit(0.5)
                    })
                    .collect();
                let nv = norm2(&v);
                v.iter_mut().for_each(|a| *a = *a / nv);
                let mut est = T::zero();
                let mut w = vec![T::zero(); self.dim];
                for _ in 0..20 {
                    self.apply_into(&v, &mut w);
                    let nw = norm2(&w);
                    est = est.max(nw);
                    if !(nw > T::zero()) {
                        break;
                    }
                    for (a, &b) in v.iter_mut().zip(&w) {
                        *a = b / nw;
                    }
                }
                est
            }
        }
    }
}

/// Functional form of [`QuasiNewtonOp::update`].
pub fn qn_update<T: Scalar>(mut op: QuasiNewtonOp<T>, s: &[T], y: &[T]) -> QuasiNewtonOp<T> {
    op.update(s, y);
    op
}

pub fn qn_apply<T: Scalar>(op: &QuasiNewtonOp<T>, v: &[T]) -> Vec<T> {
    op.apply(v)
}

pub fn qn_norm_estimate<T: Scalar>(op: &QuasiNewtonOp<T>) -> T {
    op.norm_estimate()
}
