//! Quadratic models `g's + 1/2 s'(B + diag(theta))s` of the smooth part.

use crate::error::SolverError;
use crate::linalg::dot;
use crate::oracle::Objective;
use crate::qnops::QuasiNewtonOp;
use crate::Scalar;

pub struct QuadraticModel<'a, T: Scalar> {
    pub grad: &'a [T],
    pub op: &'a QuasiNewtonOp<T>,
    pub theta: Option<&'a [T]>,
    work: Vec<T>,
}

impl<'a, T: Scalar> QuadraticModel<'a, T> {
    pub fn new(grad: &'a [T], op: &'a QuasiNewtonOp<T>, theta: Option<&'a [T]>) -> Self {
        Self {
            grad,
            op,
            theta,
            work: vec![T::zero(); grad.len()],
        }
    }

    /// `(B + diag(theta)) s`
    pub fn curvature_times(&mut self, s: &[T], out: &mut [T]) {
        self.op.apply_into(s, out);
        if let Some(theta) = self.theta {
            for ((o, &t), &si) in out.iter_mut().zip(theta).zip(s) {
                *o = *o + t * si;
            }
        }
    }

    /// `g's + 1/2 s'(B + diag(theta))s`
    pub fn eval(&mut self, s: &[T]) -> T {
        let mut w = std::mem::take(&mut self.work);
        self.curvature_times(s, &mut w);
        let v = dot(self.grad, s) + dot(s, &w) / T::lit(2.0);
        self.work = w;
        v
    }
}

impl<T: Scalar> Objective<T> for QuadraticModel<'_, T> {
    fn value(&mut self, s: &[T]) -> Result<T, SolverError> {
        Ok(self.eval(s))
    }

    fn gradient(&mut self, s: &[T], g: &mut [T]) -> Result<(), SolverError> {
        self.curvature_times(s, g);
        for (gi, &ci) in g.iter_mut().zip(self.grad) {
            *gi = *gi + ci;
        }
        Ok(())
    }
}
