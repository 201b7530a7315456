//! Barrier interior-point trust-region method for bound-constrained
//! regularized problems.
//!
//! The bounds are replaced by a logarithmic barrier with parameter `mu`. For
//! each `mu` an inner trust-region loop approximately minimizes
//! `f + phi_mu + h` with steps kept inside a fraction-to-boundary box, and
//! bound multipliers are updated from a linearized complementarity condition.
//! The outer loop drives `mu` to zero and finishes with a crossover that makes
//! the final primal-dual pair exactly complementary.
//!
//! Two step variants are provided: RIPM solves each quadratic model with R2,
//! RIPMDH uses a diagonal model and closed-form steps.

pub mod barrier;
pub mod crossover;
pub mod dual;
pub mod measures;
mod solver;

use serde::{Deserialize, Serialize};

use crate::error::SolverError;
use crate::regprox::Regularizer;
use crate::trust_region::TrustRegionOptions;
use crate::Scalar;

pub use barrier::{barrier_grad, barrier_value, capped_curvature, complementarity_residual};
pub use crossover::{crossover, crossover_violations, kkt_residuals};
pub use dual::{dual_update, safeguard_interval, safeguard_violations, DualEstimate};
pub use measures::{cauchy_step, xi_l, FirstOrderStep};
pub use solver::{inner_solve, ipm_solve, InnerExit, InnerOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IpmVariant {
    /// Quadratic model with `B + Theta`, solved with R2 (RIPM).
    R2Subsolver,
    /// Diagonal model `sigma I + Theta`, solved in closed form (RIPMDH).
    DiagonalHessian,
}

impl IpmVariant {
    pub fn name(self) -> &'static str {
        match self {
            IpmVariant::R2Subsolver => "RIPM-R2",
            IpmVariant::DiagonalHessian => "RIPMDH",
        }
    }
}

/// Criticality measure used by the inner and outer stopping tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StoppingMeasure {
    /// `xi_cp`, built on the barrier gradient `grad f - mu X^-1 e`.
    XiCp,
    /// `xi_L`, built on the Lagrangian gradient `grad f - z`; convex `h` only.
    XiL,
}

/// Parameters of one inner loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierState<T> {
    pub mu: T,
    pub delta_frac: T,
    /// Absolute part of the dual tolerance; the relative part
    /// `eps_ri * (first inner measure)` is added by the inner loop.
    pub eps_d: T,
    pub eps_p: T,
    pub outer_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IpmOptions<T> {
    pub variant: IpmVariant,
    pub measure: StoppingMeasure,
    pub mu0: T,
    pub mu_factor: T,
    /// `eps_k = mu_k ^ eps_exponent`.
    pub eps_exponent: T,
    /// `Delta_{k,0} = delta_factor * mu_k`.
    pub delta_factor: T,
    pub eps_a: T,
    pub eps_r: T,
    pub eps_ri: T,
    pub kappa_bar: T,
    pub kappa_zul: T,
    pub kappa_zuu: T,
    pub delta_frac: T,
    pub inner_cap: usize,
    pub max_outer: usize,
    pub unbounded_floor: T,
    /// Stop once more than this many objective evaluations were spent.
    pub max_eval: Option<usize>,
    /// Ratio thresholds, radius factors, `alpha`, `beta`, `delta_max` and the
    /// R2 subsolver settings; `delta_init`, `max_iter` and tolerances are unused.
    pub tr: TrustRegionOptions<T>,
}

impl<T: Scalar> Default for IpmOptions<T> {
    fn default() -> Self {
        Self {
            variant: IpmVariant::R2Subsolver,
            measure: StoppingMeasure::XiL,
            mu0: T::one(),
            mu_factor: T::lit(0.1),
            eps_exponent: T::lit(1.01),
            delta_factor: T::lit(1000.0),
            eps_a: T::lit(1e-4),
            eps_r: T::lit(1e-4),
            eps_ri: T::lit(0.1),
            kappa_bar: T::lit(1e6),
            kappa_zul: T::lit(0.5),
            kappa_zuu: T::lit(1e10),
            delta_frac: T::lit(0.05),
            inner_cap: 200,
            max_outer: 40,
            unbounded_floor: T::lit(-1e30),
            max_eval: None,
            tr: TrustRegionOptions::default(),
        }
    }
}

impl<T: Scalar> IpmOptions<T> {
    pub fn ripm() -> Self {
        Self::default()
    }

    pub fn ripmdh() -> Self {
        Self {
            variant: IpmVariant::DiagonalHessian,
            ..Self::default()
        }
    }

    /// The "-p" settings: smaller initial barrier parameter, loose inner tolerance.
    pub fn with_p_preset(mut self) -> Self {
        self.mu0 = T::lit(1e-3);
        self.eps_ri = T::one();
        self
    }

    /// `XiL` is only meaningful for convex `h`; nonconvex regularizers use `XiCp`.
    pub fn effective_measure(&self, h: &Regularizer<T>) -> StoppingMeasure {
        if h.is_convex() {
            self.measure
        } else {
            StoppingMeasure::XiCp
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let zero = T::zero();
        let one = T::one();
        let ok = self.mu0 > zero
            && self.mu_factor > zero
            && self.mu_factor < one
            && self.eps_exponent > zero
            && self.delta_factor > zero
            && self.eps_a >= zero
            && self.eps_r >= zero
            && self.eps_ri >= zero
            && self.kappa_bar > zero
            && self.kappa_zul > zero
            && self.kappa_zul < one
            && self.kappa_zuu > one
            && self.delta_frac > zero
            && self.delta_frac < one
            && self.inner_cap >= 1
            && self.max_outer >= 1;
        if !ok {
            return Err(SolverError::InvalidOptions(format!("{self:?}")));
        }
        self.tr.validate()
    }
}
