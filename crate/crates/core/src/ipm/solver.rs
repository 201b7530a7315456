//! Inner trust-region loop on the barrier subproblem and the outer loop on `mu`.

use std::time::Instant;

use crate::error::SolverError;
use crate::ipm::barrier::{barrier_value, capped_curvature, complementarity_residual};
use crate::ipm::crossover::{crossover, crossover_violations};
use crate::ipm::dual::{dual_update, safeguard_violations, DualEstimate};
use crate::ipm::measures::{
    barrier_model_gradient, lagrangian_gradient, prox_gradient_step, step_box,
};
use crate::ipm::{BarrierState, IpmOptions, IpmVariant, StoppingMeasure};
use crate::linalg::{dot, norm_inf, sub};
use crate::model::QuadraticModel;
use crate::oracle::{Objective, SmoothObjective, Traced};
use crate::qnops::QuasiNewtonOp;
use crate::r2::{failure_report, r2_core};
use crate::regprox::{iprox_shifted, BoundBox, Regularizer};
use crate::report::{Diagnostics, SolverReport, Termination};
use crate::trust_region::with_radius;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerExit {
    /// Both the criticality and the complementarity tests passed.
    Tolerance,
    /// The iteration cap was reached.
    Cap,
    /// The objective evaluation budget was exhausted.
    Budget,
    /// The trial point rounded to the current iterate: the radius is below
    /// the floating-point resolution of `x`.
    Stalled,
}

#[derive(Debug, Clone)]
pub struct InnerOutcome<T> {
    pub x: Vec<T>,
    pub z: DualEstimate<T>,
    pub f: T,
    pub delta: T,
    pub nu: T,
    /// Criticality measure at the exit point.
    pub measure: T,
    /// Criticality measure at the first iteration.
    pub first_measure: T,
    /// `||X z - mu e||` at the exit point.
    pub complementarity: T,
    pub exit: InnerExit,
    pub iterations: usize,
    pub accepted_steps: usize,
}

struct Engine<'s, 'a, T: Scalar> {
    obj: &'s mut Traced<'a, T>,
    h: &'s Regularizer<T>,
    bounds: &'s BoundBox<T>,
    qn: &'s mut QuasiNewtonOp<T>,
    opts: &'s IpmOptions<T>,
    measure_kind: StoppingMeasure,
    diag: Diagnostics,
    n_prox: usize,
    x: Vec<T>,
    z: DualEstimate<T>,
    f: T,
    hx: T,
    g: Vec<T>,
}

impl<'s, 'a, T: Scalar> Engine<'s, 'a, T> {
    #[allow(clippy::too_many_arguments)]
    fn start(
        obj: &'s mut Traced<'a, T>,
        h: &'s Regularizer<T>,
        bounds: &'s BoundBox<T>,
        qn: &'s mut QuasiNewtonOp<T>,
        opts: &'s IpmOptions<T>,
        x0: &[T],
        z0: DualEstimate<T>,
    ) -> Result<Self, SolverError> {
        let n = x0.len();
        if n != bounds.dim() || qn.dim() != n || z0.lower.len() != n || z0.upper.len() != n {
            return Err(SolverError::DimensionMismatch {
                expected: bounds.dim(),
                got: n,
            });
        }
        if let Some(index) = bounds.first_boundary_violation(x0) {
            return Err(SolverError::BoundaryPoint { index });
        }
        let f = obj.value(x0)?;
        if !f.is_finite() {
            return Err(SolverError::OracleFailure(
                "objective is not finite at the starting point".into(),
            ));
        }
        let hx = h.value(x0);
        let mut g = vec![T::zero(); n];
        obj.gradient(x0, &mut g)?;
        obj.record(f + hx);
        Ok(Self {
            obj,
            h,
            bounds,
            qn,
            opts,
            measure_kind: opts.effective_measure(h),
            diag: Diagnostics::default(),
            n_prox: 0,
            x: x0.to_vec(),
            z: z0,
            f,
            hx,
            g,
        })
    }

    fn budget_exhausted(&self) -> bool {
        matches!(self.opts.max_eval, Some(m) if self.obj.evaluations() > m)
    }

    /// Every finite gap of `x_new` is positive and `x_new` respects the
    /// fraction-to-boundary floors `l + delta * min gap(x_old)` and
    /// `u - delta * min gap(x_old)`, evaluated as the step box builds them.
    fn interior_chain_ok(&self, x_old: &[T], x_new: &[T], delta: T) -> bool {
        let b = self.bounds;
        let (gl, gu) = b.min_gaps(x_old);
        (0..x_new.len()).all(|i| {
            let lo_ok = !b.has_lower(i) || (x_new[i] > b.lower[i] && x_new[i] >= b.lower[i] + delta * gl);
            let hi_ok = !b.has_upper(i) || (x_new[i] < b.upper[i] && x_new[i] <= b.upper[i] - delta * gu);
            lo_ok && hi_ok
        })
    }

    fn set_duals(&mut self, x_new: &[T], s: &[T], mu: T) -> Result<(), SolverError> {
        let o = self.opts;
        let z_new = dual_update(x_new, &self.x, &self.z, s, mu, o.kappa_zul, o.kappa_zuu, self.bounds)?;
        self.diag.dual_safeguard_violations +=
            safeguard_violations(x_new, &self.z, &z_new, mu, o.kappa_zul, o.kappa_zuu, self.bounds);
        self.z = z_new;
        Ok(())
    }

    fn inner(&mut self, state: &BarrierState<T>, delta0: T) -> Result<InnerOutcome<T>, SolverError> {
        let n = self.x.len();
        let half = T::lit(0.5);
        let o = self.opts;
        let mu = state.mu;
        let tr = &o.tr;
        let mut delta = delta0.min(tr.delta_max);
        let mut phi = barrier_value(mu, &self.x, self.bounds);
        let mut eps_d = None;
        let mut first_measure = T::nan();
        let mut iterations = 0;
        let mut accepted = 0;
        let mut g_new = vec![T::zero(); n];
        let mut bs = vec![T::zero(); n];

        let (exit, measure, nu, complementarity) = loop {
            let theta = capped_curvature(&self.x, &self.z, self.bounds, o.kappa_bar);
            let theta_max = theta.iter().fold(T::zero(), |a, &b| a.max(b));
            let lip = self.qn.norm_estimate() + theta_max;
            let nu = T::one() / (lip + T::one() / (tr.alpha * delta));
            let bx = step_box(&self.x, delta, state.delta_frac, self.bounds)?;
            let gb = barrier_model_gradient(&self.g, mu, &self.x, self.bounds)?;
            let cp = prox_gradient_step(&self.x, &gb, nu, self.h, &bx)?;
            self.n_prox += 1;
            if !cp.satisfies_decrease_bound(nu, self.hx) {
                self.diag.xi_bound_violations += 1;
            }
            let measure = match self.measure_kind {
                StoppingMeasure::XiCp => cp.measure(nu),
                StoppingMeasure::XiL => {
                    let gl = lagrangian_gradient(&self.g, &self.z);
                    let sl = prox_gradient_step(&self.x, &gl, nu, self.h, &bx)?;
                    self.n_prox += 1;
                    if !sl.satisfies_decrease_bound(nu, self.hx) {
                        self.diag.xi_bound_violations += 1;
                    }
                    sl.measure(nu)
                }
            };
            let compl = complementarity_residual(&self.x, &self.z, mu, self.bounds);
            let tol_d = *eps_d.get_or_insert_with(|| {
                first_measure = measure;
                state.eps_d + o.eps_ri * measure
            });
            if measure <= tol_d && compl <= state.eps_p {
                self.diag.tolerance_exits += 1;
                if compl > state.eps_p {
                    self.diag.complementarity_exit_violations += 1;
                }
                break (InnerExit::Tolerance, measure, nu, compl);
            }
            if iterations >= o.inner_cap {
                self.diag.inner_cap_exits += 1;
                break (InnerExit::Cap, measure, nu, compl);
            }
            if self.budget_exhausted() {
                break (InnerExit::Budget, measure, nu, compl);
            }
            iterations += 1;
            self.diag.iterations += 1;

            let s1_inf = norm_inf(&cp.step);
            if s1_inf == T::zero() {
                // x solves the barrier subproblem; only the multipliers move
                let x = self.x.clone();
                self.set_duals(&x, &vec![T::zero(); n], mu)?;
                continue;
            }
            let cap = delta.min(tr.beta * s1_inf);
            let sbox = with_radius(&bx, cap);
            let diag_curv: Option<Vec<T>> = match o.variant {
                IpmVariant::R2Subsolver => None,
                IpmVariant::DiagonalHessian => Some(
                    self.qn
                        .diagonal()
                        .iter()
                        .zip(&theta)
                        .map(|(&d, &t)| d + t)
                        .collect(),
                ),
            };
            let s = match &diag_curv {
                None => {
                    let mut model = QuadraticModel::new(&gb, self.qn, Some(&theta));
                    let out = r2_core(&mut model, self.h, &self.x, &sbox, &cp.step, &tr.subsolver)?;
                    self.n_prox += out.n_prox;
                    model.curvature_times(&out.x, &mut bs);
                    out.x
                }
                Some(d) => {
                    let q: Vec<T> = gb.iter().zip(d).map(|(&gi, &di)| -gi / di).collect();
                    self.n_prox += 1;
                    let s = iprox_shifted(self.h, d, &q, &self.x, &sbox)?;
                    for i in 0..n {
                        bs[i] = d[i] * s[i];
                    }
                    s
                }
            };
            let s_inf = norm_inf(&s);
            if s_inf > cap {
                self.diag.step_cap_violations += 1;
            }
            let x_trial: Vec<T> = self.x.iter().zip(&s).map(|(&a, &b)| a + b).collect();
            if x_trial == self.x {
                break (InnerExit::Stalled, measure, nu, compl);
            }
            let h_trial = self.h.value(&x_trial);
            let dh = self.h.decrease(&self.x, &s);
            let pred = -(dot(&gb, &s) + half * dot(&s, &bs)) + dh;
            let phi_trial = barrier_value(mu, &x_trial, self.bounds);
            let mut f_trial = T::nan();
            let rho = if phi_trial.is_finite() && pred > T::zero() {
                f_trial = self.obj.value(&x_trial)?;
                if f_trial.is_finite() {
                    let ared = (self.f - f_trial) + (phi - phi_trial) + dh;
                    ared / pred
                } else {
                    T::neg_infinity()
                }
            } else {
                T::neg_infinity()
            };
            if rho >= tr.eta1 {
                let before = self.f + phi + self.hx;
                let after = f_trial + phi_trial + h_trial;
                if after > before + T::lit(1e-12) * before.abs() {
                    self.diag.descent_violations += 1;
                }
                if !self.interior_chain_ok(&self.x, &x_trial, state.delta_frac) {
                    self.diag.interiority_violations += 1;
                }
                let step = sub(&x_trial, &self.x);
                self.obj.gradient(&x_trial, &mut g_new)?;
                let y = sub(&g_new, &self.g);
                self.qn.update(&step, &y);
                self.set_duals(&x_trial, &step, mu)?;
                self.x = x_trial;
                self.f = f_trial;
                self.hx = h_trial;
                phi = phi_trial;
                std::mem::swap(&mut self.g, &mut g_new);
                self.obj.record(self.f + self.hx);
                accepted += 1;
                self.diag.successful_steps += 1;
                if self.f + self.hx < o.unbounded_floor {
                    return Err(SolverError::ObjectiveUnbounded {
                        floor: o.unbounded_floor.to_f64().unwrap_or(f64::NEG_INFINITY),
                    });
                }
            }
            let next = tr.next_radius(delta, rho, s_inf);
            if !tr.radius_conforms(delta, next, rho) {
                self.diag.radius_violations += 1;
            }
            delta = next;
        };

        Ok(InnerOutcome {
            x: self.x.clone(),
            z: self.z.clone(),
            f: self.f,
            delta,
            nu,
            measure,
            first_measure,
            complementarity,
            exit,
            iterations,
            accepted_steps: accepted,
        })
    }
}

/// Runs one inner loop at fixed `mu` from `(x0, z0)` with initial radius `delta0`.
///
/// The dual tolerance is `state.eps_d + opts.eps_ri * (first measure)`.
#[allow(clippy::too_many_arguments)]
pub fn inner_solve<T: Scalar>(
    smooth: &dyn SmoothObjective<T>,
    h: &Regularizer<T>,
    bounds: &BoundBox<T>,
    qn: &mut QuasiNewtonOp<T>,
    state: &BarrierState<T>,
    x0: &[T],
    z0: &DualEstimate<T>,
    delta0: T,
    opts: &IpmOptions<T>,
) -> Result<(InnerOutcome<T>, Diagnostics), SolverError> {
    opts.validate()?;
    let mut traced = Traced::new(smooth);
    let mut engine = Engine::start(&mut traced, h, bounds, qn, opts, x0, z0.clone())?;
    let out = engine.inner(state, delta0)?;
    let mut diag = engine.diag;
    diag.qn_skipped_updates = qn.skipped_updates();
    Ok((out, diag))
}

/// Full interior-point solve from the strictly interior point `x0`, with
/// `z0 = e` on every finite bound and `qn` as the Hessian approximation of `f`.
///
/// Returns `Err` for invalid input (options, dimensions, `x0` not interior);
/// failures during the iteration are reported through the termination status.
pub fn ipm_solve<T: Scalar>(
    smooth: &dyn SmoothObjective<T>,
    h: &Regularizer<T>,
    bounds: &BoundBox<T>,
    x0: &[T],
    mut qn: QuasiNewtonOp<T>,
    opts: &IpmOptions<T>,
) -> Result<SolverReport<T>, SolverError> {
    opts.validate()?;
    if x0.len() != bounds.dim() || qn.dim() != x0.len() {
        return Err(SolverError::DimensionMismatch {
            expected: bounds.dim(),
            got: x0.len(),
        });
    }
    if let Some(index) = bounds.first_boundary_violation(x0) {
        return Err(SolverError::BoundaryPoint { index });
    }
    let name = opts.variant.name();
    let start = Instant::now();
    let mut traced = Traced::new(smooth);
    let result = outer_loop(&mut traced, h, bounds, x0, &mut qn, opts);
    let wall = start.elapsed().as_secs_f64();
    Ok(match result {
        Ok(mut report) => {
            report.solver = name.into();
            report.n_f = traced.counted.n_f;
            report.n_grad = traced.counted.n_grad;
            report.wall_time_s = wall;
            report.diagnostics.qn_skipped_updates = qn.skipped_updates();
            let mut trace = std::mem::take(&mut traced.trace);
            if let Some(last) = trace.last_mut() {
                last.1 = report.final_f + report.final_h;
            }
            report.trace = trace;
            report
        }
        Err(e) => failure_report(name, x0, h, &traced, wall, e),
    })
}

fn outer_loop<T: Scalar>(
    obj: &mut Traced<'_, T>,
    h: &Regularizer<T>,
    bounds: &BoundBox<T>,
    x0: &[T],
    qn: &mut QuasiNewtonOp<T>,
    opts: &IpmOptions<T>,
) -> Result<SolverReport<T>, SolverError> {
    let z0 = DualEstimate::ones(bounds);
    let mut engine = Engine::start(obj, h, bounds, qn, opts, x0, z0)?;
    let mut mu = opts.mu0;
    let mut eps_conv = None;
    let mut termination = Termination::MaxIter;
    let mut message = None;
    let mut measure;
    let mut k = 0;
    loop {
        let state = BarrierState {
            mu,
            delta_frac: opts.delta_frac,
            eps_d: mu.powf(opts.eps_exponent),
            eps_p: mu.powf(opts.eps_exponent),
            outer_index: k,
        };
        let out = engine.inner(&state, opts.delta_factor * mu)?;
        engine.diag.outer_iterations += 1;
        measure = out.measure;
        let eps = *eps_conv.get_or_insert(opts.eps_a + opts.eps_r * out.first_measure);
        if mu < eps && out.complementarity < eps && out.measure < eps {
            termination = Termination::Converged;
            break;
        }
        if out.exit == InnerExit::Stalled {
            message = Some(format!("stalled at mu = {:e}: trust region below floating-point resolution", mu.to_f64().unwrap_or(f64::NAN)));
            break;
        }
        k += 1;
        if out.exit == InnerExit::Budget || engine.budget_exhausted() || k >= opts.max_outer {
            break;
        }
        mu = mu * opts.mu_factor;
    }

    let (x, z) = crossover(&engine.x, &engine.z, mu, bounds);
    let mut diag = engine.diag;
    diag.crossover_violations += crossover_violations(&x, &z, bounds);
    let final_f = engine.obj.counted.value_uncounted(&x)?;
    let final_h = h.value(&x);
    Ok(SolverReport {
        solver: String::new(),
        final_h_over_lambda: h.unweighted(&x),
        x,
        z_lower: Some(z.lower),
        z_upper: Some(z.upper),
        final_f,
        final_h,
        final_criticality: measure,
        dist_to_xstar: None,
        n_f: 0,
        n_grad: 0,
        n_prox: engine.n_prox,
        wall_time_s: 0.0,
        trace: Vec::new(),
        termination,
        message,
        diagnostics: diag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::FnObjective;

    /// Root of a continuous function with a sign change on `[a, b]`.
    fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        let fa = f(a);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if (f(m) > 0.0) == (fa > 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    fn tight(variant: IpmVariant) -> IpmOptions<f64> {
        IpmOptions {
            variant,
            eps_ri: 0.0,
            inner_cap: 500,
            ..IpmOptions::default()
        }
    }

    fn shifted_quadratic() -> impl SmoothObjective<f64> {
        FnObjective::new(
            1,
            |x: &[f64]| 0.5 * (x[0] - 2.0) * (x[0] - 2.0),
            |x: &[f64], g: &mut [f64]| g[0] = x[0] - 2.0,
        )
    }

    #[test]
    fn inner_loop_finds_barrier_point() {
        let f = shifted_quadratic();
        let b = BoundBox::nonnegative(1);
        for variant in [IpmVariant::R2Subsolver, IpmVariant::DiagonalHessian] {
            for &mu in &[1.0, 0.1, 0.01] {
                let expected = bisect(|x| x - 2.0 - mu / x, 1e-12, 10.0);
                let state = BarrierState {
                    mu,
                    delta_frac: 0.05,
                    eps_d: 1e-10,
                    eps_p: 1e-10,
                    outer_index: 0,
                };
                let mut qn = QuasiNewtonOp::spectral(1);
                let z0 = DualEstimate::ones(&b);
                let (out, diag) = inner_solve(
                    &f,
                    &Regularizer::zero(),
                    &b,
                    &mut qn,
                    &state,
                    &[1.0],
                    &z0,
                    1000.0 * mu,
                    &tight(variant),
                )
                .unwrap();
                assert_eq!(out.exit, InnerExit::Tolerance, "{variant:?} mu={mu}");
                assert!((out.x[0] - expected).abs() < 1e-6, "{variant:?} {} vs {expected}", out.x[0]);
                assert_eq!(diag.total_violations(), 0);
            }
        }
    }

    #[test]
    fn start_at_solution_returns_immediately() {
        let f = shifted_quadratic();
        let b = BoundBox::nonnegative(1);
        let x = 1.0 + 2f64.sqrt();
        let state = BarrierState {
            mu: 1.0,
            delta_frac: 0.05,
            eps_d: 1e-6,
            eps_p: 1e-6,
            outer_index: 0,
        };
        let z0 = DualEstimate::central(&[x], 1.0, &b);
        let mut qn = QuasiNewtonOp::lsr1(1, 5);
        let (out, _) = inner_solve(
            &f,
            &Regularizer::zero(),
            &b,
            &mut qn,
            &state,
            &[x],
            &z0,
            1.0,
            &IpmOptions::default(),
        )
        .unwrap();
        assert_eq!(out.exit, InnerExit::Tolerance);
        assert_eq!(out.accepted_steps, 0);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn outer_loop_reaches_active_bound_with_unit_multiplier() {
        let f = FnObjective::new(1, |x: &[f64]| x[0], |_: &[f64], g: &mut [f64]| g[0] = 1.0);
        let b = BoundBox::nonnegative(1);
        let rep = ipm_solve(
            &f,
            &Regularizer::zero(),
            &b,
            &[1.0],
            QuasiNewtonOp::lsr1(1, 5),
            &IpmOptions::default(),
        )
        .unwrap();
        assert_eq!(rep.termination, Termination::Converged);
        assert_eq!(rep.x, vec![0.0]);
        let zl = rep.z_lower.as_ref().unwrap()[0];
        assert!((zl - 1.0).abs() < 1e-2, "z = {zl}");
        assert_eq!(rep.diagnostics.total_violations(), 0);
        let last = rep.trace.last().unwrap().1;
        assert_eq!(last, rep.final_f + rep.final_h);
    }

    #[test]
    fn rejects_boundary_start() {
        let f = shifted_quadratic();
        let b = BoundBox::nonnegative(1);
        let r = ipm_solve(
            &f,
            &Regularizer::zero(),
            &b,
            &[0.0],
            QuasiNewtonOp::lsr1(1, 5),
            &IpmOptions::default(),
        );
        assert_eq!(r.unwrap_err(), SolverError::BoundaryPoint { index: 0 });
    }
}
