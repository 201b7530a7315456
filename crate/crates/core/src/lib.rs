//! Interior-point proximal trust-region methods for
//!
//! ```text
//! minimize f(x) + h(x)   subject to   l <= x <= u
//! ```
//!
//! where `f` is smooth and `h` is a separable nonsmooth regularizer
//! (`lambda * ||x||_1`, `lambda * ||x||_0`, or zero).
//!
//! The crate contains:
//!
//! - [`regprox`]: regularizers and their interval-constrained proximal maps,
//! - [`qnops`]: limited-memory BFGS/SR1 and spectral diagonal Hessian approximations,
//! - [`r2`]: the quadratic-regularization method R2 (standalone and as a subsolver),
//! - [`trust_region`]: the TR and TRDH projected-direction baselines,
//! - [`ipm`]: the barrier interior-point trust-region method (RIPM / RIPMDH),
//! - [`problems`]: generators for the box-constrained QP, sparse NNMF,
//!   FitzHugh-Nagumo and constrained BPDN benchmarks.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases below fix the scalar to `f64`, which is what the benchmark
//! generators produce.

pub mod error;
pub mod ipm;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod problems;
pub mod qnops;
pub mod r2;
pub mod regprox;
pub mod report;
pub mod trust_region;

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

pub use error::SolverError;
pub use ipm::{IpmOptions, IpmVariant, StoppingMeasure};
pub use oracle::{Counted, FnObjective, Objective, SmoothObjective, Traced};
pub use qnops::{QnKind, QuasiNewtonOp};
pub use r2::R2Options;
pub use regprox::{BoundBox, IntervalSet, RegKind, Regularizer};
pub use report::{Diagnostics, SolverReport, Termination};
pub use trust_region::TrustRegionOptions;

/// Floating point types the solvers are generic over.
pub trait Scalar: Float + FromPrimitive + Debug + Display + Sum + Send + Sync + 'static {
    /// Converts an `f64` literal; every literal used by the solvers is representable.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

pub type Regularizer64 = Regularizer<f64>;
pub type IntervalSet64 = IntervalSet<f64>;
pub type BoundBox64 = BoundBox<f64>;
pub type QuasiNewtonOp64 = QuasiNewtonOp<f64>;
pub type SolverReport64 = SolverReport<f64>;
pub type R2Options64 = R2Options<f64>;
pub type TrustRegionOptions64 = TrustRegionOptions<f64>;
pub type IpmOptions64 = IpmOptions<f64>;
