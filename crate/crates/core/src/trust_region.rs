//! Projected-direction trust-region baselines TR and TRDH.
//!
//! Bounds are folded into the nonsmooth term, so every step lives in
//! `Delta * B_inf  ∩  (-x + [l, u])`. TR solves the quadratic-model subproblem
//! with R2; TRDH uses a spectral diagonal Hessian and solves it in closed form.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::SolverError;
use crate::linalg::{dot, norm2, norm_inf, sub};
use crate::model::QuadraticModel;
use crate::oracle::{Objective, SmoothObjective, Traced};
use crate::qnops::QuasiNewtonOp;
use crate::r2::{failure_report, r2_core, R2Options};
use crate::regprox::{iprox_shifted, iprox_uniform, BoundBox, IntervalSet, Regularizer};
use crate::report::{Diagnostics, SolverReport, Termination};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct TrustRegionOptions<T> {
    pub delta_init: T,
    pub delta_max: T,
    pub eta1: T,
    pub eta2: T,
    pub gamma1: T,
    pub gamma2: T,
    pub gamma3: T,
    pub gamma4: T,
    pub alpha: T,
    pub beta: T,
    pub max_iter: usize,
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_eval: Option<usize>,
    pub subsolver: R2Options<T>,
}

impl<T: Scalar> Default for TrustRegionOptions<T> {
    fn default() -> Self {
        Self {
            delta_init: T::lit(0.1),
            delta_max: T::lit(1e12),
            eta1: T::lit(1e-3),
            eta2: T::lit(0.9),
            gamma1: T::lit(0.25),
            gamma2: T::lit(0.5),
            gamma3: T::lit(2.0),
            gamma4: T::lit(4.0),
            alpha: T::one(),
            beta: T::one() / T::epsilon(),
            max_iter: 10_000,
            abs_tol: T::lit(1e-4),
            rel_tol: T::lit(1e-4),
            max_eval: None,
            subsolver: R2Options::subsolver(),
        }
    }
}

impl<T: Scalar> TrustRegionOptions<T> {
    pub fn validate(&self) -> Result<(), SolverError> {
        let ok = T::zero() < self.eta1
            && self.eta1 <= self.eta2
            && self.eta2 < T::one()
            && T::zero() < self.gamma1
            && self.gamma1 <= self.gamma2
            && self.gamma2 < T::one()
            && T::one() < self.gamma3
            && self.gamma3 <= self.gamma4
            && self.delta_init > T::zero()
            && self.delta_init <= self.delta_max
            && self.alpha > T::zero()
            && self.beta >= T::one()
            && self.max_iter >= 1
            && self.abs_tol >= T::zero()
            && self.rel_tol >= T::zero();
        if !ok {
            return Err(SolverError::InvalidOptions(format!("{self:?}")));
        }
        self.subsolver.validate()
    }

    /// New radius after an iteration with ratio `rho` and step norm `step_inf`.
    ///
    /// Very successful: `gamma3 * Delta`; successful: unchanged; unsuccessful:
    /// `gamma2 * min(Delta, ||s||)` floored at `gamma1 * Delta`. Capped at `delta_max`.
    pub fn next_radius(&self, delta: T, rho: T, step_inf: T) -> T {
        let next = if rho >= self.eta2 {
            self.gamma3 * delta
        } else if rho >= self.eta1 {
            delta
        } else {
            (self.gamma2 * delta.min(step_inf)).max(self.gamma1 * delta)
        };
        next.min(self.delta_max)
    }

    /// Whether a radius transition follows the update schedule.
    pub fn radius_conforms(&self, old: T, new: T, rho: T) -> bool {
        if new > self.delta_max {
            return false;
        }
        let (lo, hi) = if rho >= self.eta2 {
            (self.gamma3 * old, self.gamma4 * old)
        } else if rho >= self.eta1 {
            (self.gamma2 * old, old)
        } else {
            (self.gamma1 * old, self.gamma2 * old)
        };
        let within = new >= lo && new <= hi;
        // the cap may pull a very successful radius below gamma3 * old
        within || (new == self.delta_max && rho >= self.eta2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepKind {
    /// Quadratic model with a quasi-Newton operator, solved with R2.
    Subsolver,
    /// Diagonal model solved componentwise.
    Diagonal,
}

/// `-x + [lower, upper]`, repaired where rounding made an end cross zero.
pub(crate) fn feasible_steps<T: Scalar>(bounds: &BoundBox<T>, x: &[T]) -> IntervalSet<T> {
    let mut bx = bounds.shifted(x);
    for i in 0..x.len() {
        bx.lo[i] = bx.lo[i].min(T::zero());
        bx.hi[i] = bx.hi[i].max(T::zero());
    }
    bx
}

pub(crate) fn with_radius<T: Scalar>(bx: &IntervalSet<T>, radius: T) -> IntervalSet<T> {
    IntervalSet {
        lo: bx.lo.iter().map(|&l| l.max(-radius)).collect(),
        hi: bx.hi.iter().map(|&u| u.min(radius)).collect(),
    }
}

/// TR with R2 as subproblem solver and the given quasi-Newton operator.
pub fn tr_solve<T: Scalar>(
    smooth: &dyn SmoothObjective<T>,
    h: &Regularizer<T>,
    bounds: &BoundBox<T>,
    x0: &[T],
    qn: QuasiNewtonOp<T>,
    opts: &TrustRegionOptions<T>,
) -> Result<SolverReport<T>, SolverError> {
    run_trust_region("TR-R2", StepKind::Subsolver, smooth, h, bounds, x0, qn, opts)
}

/// TRDH: spectral-gradient diagonal model with closed-form steps.
pub fn trdh_solve<T: Scalar>(
    smooth: &dyn SmoothObjective<T>,
    h: &Regularizer<T>,
    bounds: &BoundBox<T>,
    x0: &[T],
    opts: &TrustRegionOptions<T>,
) -> Result<SolverReport<T>, SolverError> {
    let qn = QuasiNewtonOp::spectral(x0.len());
    run_trust_region("TRDH", StepKind::Diagonal, smooth, h, bounds, x0, qn, opts)
}

#[allow(clippy::too_many_arguments)]
fn run_trust_region<T: Scalar>(
    name: &str,
    kind: StepKind,
    smooth: &dyn SmoothObjective<T>,
    h: &Regularizer<T>,
    bounds: &BoundBox<T>,
    x0: &[T],
    mut qn: QuasiNewtonOp<T>,
    opts: &TrustRegionOptions<T>,
) -> Result<SolverReport<T>, SolverError> {
    opts.validate()?;
    if x0.len() != bounds.dim() || qn.dim() != x0.len() {
        return Err(SolverError::DimensionMismatch {
            expected: bounds.dim(),
            got: x0.len(),
        });
    }
    let start = Instant::now();
    let mut traced = Traced::new(smooth);
    let result = tr_loop(kind, &mut traced, h, bounds, x0, &mut qn, opts);
    let wall = start.elapsed().as_secs_f64();
    Ok(match result {
        Ok(mut report) => {
            report.solver = name.into();
            report.n_f = traced.counted.n_f;
            report.n_grad = traced.counted.n_grad;
            report.wall_time_s = wall;
            report.trace = std::mem::take(&mut traced.trace);
            report.diagnostics.qn_skipped_updates = qn.skipped_updates();
            report
        }
        Err(e) => failure_report(name, x0, h, &traced, wall, e),
    })
}

fn tr_loop<T: Scalar>(
    kind: StepKind,
    obj: &mut Traced<'_, T>,
    h: &Regularizer<T>,
    bounds: &BoundBox<T>,
    x0: &[T],
    qn: &mut QuasiNewtonOp<T>,
    opts: &TrustRegionOptions<T>,
) -> Result<SolverReport<T>, SolverError> {
    let n = x0.len();
    let half = T::lit(0.5);
    let mut x = bounds.project(x0);
    let mut f = obj.value(&x)?;
    if !f.is_finite() {
        return Err(SolverError::OracleFailure(
            "objective is not finite at the starting point".into(),
        ));
    }
    let mut hx = h.value(&x);
    let mut g = vec![T::zero(); n];
    obj.gradient(&x, &mut g)?;
    obj.record(f + hx);

    let mut delta = opts.delta_init;
    let mut diag = Diagnostics::default();
    let mut n_prox = 0usize;
    let mut tol = None;
    let mut measure;
    let mut termination = Termination::MaxIter;
    let mut g_new = vec![T::zero(); n];

    loop {
        let lip = qn.norm_estimate();
        let nu = T::one() / (lip + T::one() / (opts.alpha * delta));
        let feas = feasible_steps(bounds, &x);
        let cauchy_box = with_radius(&feas, delta);
        let q: Vec<T> = g.iter().map(|&gi| -nu * gi).collect();
        let s1 = iprox_uniform(h, T::one() / nu, &q, &x, &cauchy_box)?;
        n_prox += 1;
        let xi = h.decrease(&x, &s1) - dot(&g, &s1);
        let s1_norm2 = norm2(&s1);
        let lower = half * s1_norm2 * s1_norm2 / nu;
        if xi < lower - T::lit(1e-10) * (T::one() + lower.abs() + hx.abs()) {
            diag.xi_bound_violations += 1;
        }
        measure = (xi.max(T::zero()) / nu).sqrt();
        let tol = *tol.get_or_insert(opts.abs_tol + opts.rel_tol * measure);
        if measure <= tol || !(xi > T::zero()) {
            termination = Termination::Converged;
            break;
        }
        if diag.iterations >= opts.max_iter {
            break;
        }
        if let Some(max_eval) = opts.max_eval {
            if obj.evaluations() > max_eval {
                break;
            }
        }
        diag.iterations += 1;

        let cap = delta.min(opts.beta * norm_inf(&s1));
        let step_box = with_radius(&feas, cap);
        let s = match kind {
            StepKind::Subsolver => {
                let mut model = QuadraticModel::new(&g, qn, None);
                let out = r2_core(&mut model, h, &x, &step_box, &s1, &opts.subsolver)?;
                n_prox += out.n_prox;
                out.x
            }
            StepKind::Diagonal => {
                let d = qn.diagonal();
                let q: Vec<T> = g.iter().zip(&d).map(|(&gi, &di)| -gi / di).collect();
                n_prox += 1;
                iprox_shifted(h, &d, &q, &x, &step_box)?
            }
        };
        if norm_inf(&s) > cap {
            diag.step_cap_violations += 1;
        }
        let x_trial = bounds.project(&x.iter().zip(&s).map(|(&a, &b)| a + b).collect::<Vec<_>>());
        let h_trial = h.value(&x_trial);
        let bs = qn.apply(&s);
        let pred = -(dot(&g, &s) + half * dot(&s, &bs)) + h.decrease(&x, &s);
        let f_trial = obj.value(&x_trial)?;
        let ared = f + hx - f_trial - h_trial;
        let rho = if f_trial.is_finite() && pred > T::zero() {
            ared / pred
        } else {
            T::neg_infinity()
        };
        if rho >= opts.eta1 {
            if f_trial + h_trial > f + hx + T::lit(1e-12) * (f + hx).abs() {
                diag.descent_violations += 1;
            }
            let step = sub(&x_trial, &x);
            obj.gradient(&x_trial, &mut g_new)?;
            let y = sub(&g_new, &g);
            qn.update(&step, &y);
            x = x_trial;
            f = f_trial;
            hx = h_trial;
            std::mem::swap(&mut g, &mut g_new);
            obj.record(f + hx);
            diag.successful_steps += 1;
            if !bounds.contains(&x) {
                diag.interiority_violations += 1;
            }
        }
        let next = opts.next_radius(delta, rho, norm_inf(&s));
        if !opts.radius_conforms(delta, next, rho) {
            diag.radius_violations += 1;
        }
        delta = next;
    }

    Ok(SolverReport {
        solver: String::new(),
        final_h_over_lambda: h.unweighted(&x),
        x,
        z_lower: None,
        z_upper: None,
        final_f: f,
        final_h: hx,
        final_criticality: measure,
        dist_to_xstar: None,
        n_f: 0,
        n_grad: 0,
        n_prox,
        wall_time_s: 0.0,
        trace: Vec::new(),
        termination,
        message: None,
        diagnostics: diag,
    })
}
