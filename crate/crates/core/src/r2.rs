//! The quadratic-regularization method R2.
//!
//! Each iteration takes the proximal-gradient step with step length `1/sigma`
//! over the feasible box and adapts `sigma` from the ratio of actual to
//! first-order-model decrease. R2 runs standalone on a problem and as the
//! subproblem solver of TR and RIPM, where the smooth part is a quadratic model
//! and the regularizer is shifted by the outer iterate.

use std::time::Instant;

use crate::error::SolverError;
use crate::linalg::dot;
use crate::oracle::{Objective, SmoothObjective, Traced};
use crate::regprox::{iprox_uniform, BoundBox, IntervalSet, Regularizer};
use crate::report::{Diagnostics, SolverReport, Termination};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct R2Options<T> {
    pub sigma_init: T,
    pub sigma_min: T,
    pub eta1: T,
    pub eta2: T,
    pub gamma_dec: T,
    pub gamma_inc: T,
    pub max_iter: usize,
    pub abs_tol: T,
    pub rel_tol: T,
    /// Stop once more than this many objective evaluations were spent.
    pub max_eval: Option<usize>,
}

impl<T: Scalar> Default for R2Options<T> {
    fn default() -> Self {
        Self {
            sigma_init: T::one(),
            sigma_min: T::lit(1e-8),
            eta1: T::lit(0.25),
            eta2: T::lit(0.75),
            gamma_dec: T::lit(0.5),
            gamma_inc: T::lit(3.0),
            max_iter: 10_000,
            abs_tol: T::lit(1e-4),
            rel_tol: T::lit(1e-4),
            max_eval: None,
        }
    }
}

impl<T: Scalar> R2Options<T> {
    /// Settings used when R2 solves trust-region subproblems.
    pub fn subsolver() -> Self {
        Self {
            max_iter: 200,
            abs_tol: T::zero(),
            rel_tol: T::lit(0.1),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let ok = self.sigma_init > T::zero()
            && self.sigma_min > T::zero()
            && T::zero() < self.eta1
            && self.eta1 <= self.eta2
            && self.eta2 < T::one()
            && self.gamma_dec < T::one()
            && self.gamma_dec > T::zero()
            && self.gamma_inc > T::one()
            && self.max_iter >= 1
            && self.abs_tol >= T::zero()
            && self.rel_tol >= T::zero();
        if ok {
            Ok(())
        } else {
            Err(SolverError::InvalidOptions(format!("{self:?}")))
        }
    }
}

#[derive(Debug, Clone)]
pub struct R2Outcome<T> {
    pub x: Vec<T>,
    pub f: T,
    pub h: T,
    /// `sqrt(sigma * xi)` at the last computed step.
    pub measure: T,
    pub iterations: usize,
    pub n_prox: usize,
    pub termination: Termination,
    pub descent_violations: usize,
    pub containment_violations: usize,
}

/// Runs R2 on `obj + h(base + .)` over `bx`, starting from `v0`.
///
/// `v0` is projected onto `bx`. Returns an error only when the objective
/// cannot be evaluated at the starting point.
pub fn r2_core<T: Scalar>(
    obj: &mut dyn Objective<T>,
    h: &Regularizer<T>,
    base: &[T],
    bx: &IntervalSet<T>,
    v0: &[T],
    opts: &R2Options<T>,
) -> Result<R2Outcome<T>, SolverError> {
    let n = v0.len();
    let mut v = bx.clamp(v0);
    let mut shift: Vec<T> = base.iter().zip(&v).map(|(&b, &vi)| b + vi).collect();
    let mut fv = obj.value(&v)?;
    if !fv.is_finite() {
        return Err(SolverError::OracleFailure(
            "objective is not finite at the starting point".into(),
        ));
    }
    let mut hv = h.value(&shift);
    let mut g = vec![T::zero(); n];
    obj.gradient(&v, &mut g)?;
    obj.record(fv + hv);

    let mut sigma = opts.sigma_init;
    let mut tol = None;
    let mut out = R2Outcome {
        x: Vec::new(),
        f: fv,
        h: hv,
        measure: T::infinity(),
        iterations: 0,
        n_prox: 0,
        termination: Termination::MaxIter,
        descent_violations: 0,
        containment_violations: 0,
    };
    let mut q = vec![T::zero(); n];
    let mut local = IntervalSet {
        lo: vec![T::zero(); n],
        hi: vec![T::zero(); n],
    };
    let mut trial = vec![T::zero(); n];
    let mut trial_shift = vec![T::zero(); n];

    loop {
        for i in 0..n {
            q[i] = -g[i] / sigma;
            local.lo[i] = bx.lo[i] - v[i];
            local.hi[i] = bx.hi[i] - v[i];
            if !(local.lo[i] <= local.hi[i]) {
                // rounding at a degenerate bound
                local.lo[i] = local.hi[i].min(T::zero());
                local.hi[i] = local.hi[i].max(T::zero());
            }
        }
        let s = iprox_uniform(h, sigma, &q, &shift, &local)?;
        out.n_prox += 1;
        out.iterations += 1;
        for i in 0..n {
            trial[i] = (v[i] + s[i]).max(bx.lo[i]).min(bx.hi[i]);
            trial_shift[i] = base[i] + trial[i];
        }
        let h_trial = h.value(&trial_shift);
        let dh = h.decrease(&shift, &s);
        let xi = dh - dot(&g, &s);
        let measure = (xi.max(T::zero()) * sigma).sqrt();
        out.measure = measure;
        let tol = *tol.get_or_insert(opts.abs_tol + opts.rel_tol * measure);
        if measure <= tol || !(xi > T::zero()) {
            out.termination = Termination::Converged;
            break;
        }
        if out.iterations > opts.max_iter {
            break;
        }
        if let Some(max_eval) = opts.max_eval {
            if obj.evaluations() > max_eval {
                break;
            }
        }
        let f_trial = obj.value(&trial)?;
        let rho = if f_trial.is_finite() {
            (fv - f_trial + dh) / xi
        } else {
            T::neg_infinity()
        };
        if rho >= opts.eta1 {
            let tol_descent = T::lit(1e-12) * (fv + hv).abs();
            if f_trial + h_trial > fv + hv + tol_descent {
                out.descent_violations += 1;
            }
            std::mem::swap(&mut v, &mut trial);
            std::mem::swap(&mut shift, &mut trial_shift);
            fv = f_trial;
            hv = h_trial;
            if !bx.contains(&v) {
                out.containment_violations += 1;
            }
            obj.gradient(&v, &mut g)?;
            obj.record(fv + hv);
        }
        if rho >= opts.eta2 {
            sigma = (opts.gamma_dec * sigma).max(opts.sigma_min);
        } else if rho < opts.eta1 {
            sigma = opts.gamma_inc * sigma;
        }
    }
    out.x = v;
    out.f = fv;
    out.h = hv;
    Ok(out)
}

/// Standalone R2 on `f + h` subject to `bounds`, starting from `x0`.
pub fn r2_solve<T: Scalar>(
    smooth: &dyn SmoothObjective<T>,
    h: &Regularizer<T>,
    bounds: &BoundBox<T>,
    x0: &[T],
    opts: &R2Options<T>,
) -> Result<SolverReport<T>, SolverError> {
    opts.validate()?;
    let start = Instant::now();
    let n = x0.len();
    let bx = IntervalSet {
        lo: bounds.lower.clone(),
        hi: bounds.upper.clone(),
    };
    let mut traced = Traced::new(smooth);
    let base = vec![T::zero(); n];
    let outcome = r2_core(&mut traced, h, &base, &bx, x0, opts);
    let wall = start.elapsed().as_secs_f64();
    let out = match outcome {
        Ok(o) => o,
        Err(e) => {
            return Ok(failure_report("R2", x0, h, &traced, wall, e));
        }
    };
    let diagnostics = Diagnostics {
        iterations: out.iterations,
        descent_violations: out.descent_violations,
        interiority_violations: out.containment_violations,
        ..Diagnostics::default()
    };
    Ok(SolverReport {
        solver: "R2".into(),
        final_h_over_lambda: h.unweighted(&out.x),
        x: out.x,
        z_lower: None,
        z_upper: None,
        final_f: out.f,
        final_h: out.h,
        final_criticality: out.measure,
        dist_to_xstar: None,
        n_f: traced.counted.n_f,
        n_grad: traced.counted.n_grad,
        n_prox: out.n_prox,
        wall_time_s: wall,
        trace: traced.trace,
        termination: out.termination,
        message: None,
        diagnostics,
    })
}

pub(crate) fn failure_report<T: Scalar>(
    name: &str,
    x0: &[T],
    h: &Regularizer<T>,
    traced: &Traced<'_, T>,
    wall: f64,
    err: SolverError,
) -> SolverReport<T> {
    let termination = match err {
        SolverError::ObjectiveUnbounded { .. } => Termination::Unbounded,
        _ => Termination::OracleFailure,
    };
    SolverReport {
        solver: name.into(),
        x: x0.to_vec(),
        z_lower: None,
        z_upper: None,
        final_f: T::nan(),
        final_h: h.value(x0),
        final_h_over_lambda: h.unweighted(x0),
        final_criticality: T::nan(),
        dist_to_xstar: None,
        n_f: traced.counted.n_f,
        n_grad: traced.counted.n_grad,
        n_prox: 0,
        wall_time_s: wall,
        trace: traced.trace.clone(),
        termination,
        message: Some(err.to_string()),
        diagnostics: Diagnostics::default(),
    }
}
