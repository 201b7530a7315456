//! Generators for the four benchmark problems.
//!
//! Every instance is determined by a [`ProblemSpec`] (parameters and seed),
//! which is what gets serialized; the dense data is regenerated on demand.

pub mod bpdn;
pub mod fh;
pub mod nnmf;
pub mod qp;

use serde::{Deserialize, Serialize};

use crate::error::SolverError;
use crate::oracle::SmoothObjective;
use crate::regprox::{BoundBox, Regularizer};

pub use bpdn::{gen_bpdn, NoiseLevel};
pub use fh::gen_fh;
pub use nnmf::gen_nnmf;
pub use qp::gen_qp;

fn default_qp_lambda() -> f64 {
    0.1
}

fn default_fh_lambda() -> f64 {
    10.0
}

fn default_fh_noise() -> f64 {
    fh::DEFAULT_NOISE_SD
}

fn default_spikes() -> usize {
    5
}

/// Serializable description of a benchmark instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSpec {
    Qp {
        n: usize,
        p: f64,
        #[serde(default = "default_qp_lambda")]
        lambda: f64,
        seed: u64,
    },
    Nnmf {
        m: usize,
        n: usize,
        k: usize,
        #[serde(default = "default_qp_lambda")]
        lambda: f64,
        seed: u64,
    },
    Fh {
        n_samples: usize,
        #[serde(default = "default_fh_lambda")]
        lambda: f64,
        #[serde(default = "default_fh_noise")]
        noise_sd: f64,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        x0: Option<Vec<f64>>,
    },
    Bpdn {
        m: usize,
        n: usize,
        #[serde(default = "default_spikes")]
        n_spikes: usize,
        #[serde(default)]
        noise: NoiseLevel,
        seed: u64,
    },
}

impl ProblemSpec {
    pub fn qp(n: usize, p: f64, seed: u64) -> Self {
        ProblemSpec::Qp {
            n,
            p,
            lambda: default_qp_lambda(),
            seed,
        }
    }

    pub fn nnmf(m: usize, n: usize, k: usize, seed: u64) -> Self {
        ProblemSpec::Nnmf {
            m,
            n,
            k,
            lambda: default_qp_lambda(),
            seed,
        }
    }

    pub fn fh(n_samples: usize, seed: u64) -> Self {
        ProblemSpec::Fh {
            n_samples,
            lambda: default_fh_lambda(),
            noise_sd: default_fh_noise(),
            seed,
            x0: None,
        }
    }

    pub fn bpdn(m: usize, n: usize, seed: u64) -> Self {
        ProblemSpec::Bpdn {
            m,
            n,
            n_spikes: default_spikes(),
            noise: NoiseLevel::default(),
            seed,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProblemSpec::Qp { .. } => "qp",
            ProblemSpec::Nnmf { .. } => "nnmf",
            ProblemSpec::Fh { .. } => "fh",
            ProblemSpec::Bpdn { .. } => "bpdn",
        }
    }

    pub fn seed(&self) -> u64 {
        match *self {
            ProblemSpec::Qp { seed, .. }
            | ProblemSpec::Nnmf { seed, .. }
            | ProblemSpec::Fh { seed, .. }
            | ProblemSpec::Bpdn { seed, .. } => seed,
        }
    }

    pub fn build(&self) -> Result<ProblemInstance, SolverError> {
        let (smooth, h, bounds, x0, x_star): (Box<dyn SmoothObjective<f64>>, _, _, _, _) = match self {
            &ProblemSpec::Qp { n, p, lambda, seed } => {
                let d = gen_qp(n, p, lambda, seed)?;
                (Box::new(d.objective), d.h, d.bounds, d.x0, None)
            }
            &ProblemSpec::Nnmf {
                m,
                n,
                k,
                lambda,
                seed,
            } => {
                let d = gen_nnmf(m, n, k, lambda, seed)?;
                (Box::new(d.objective), d.h, d.bounds, d.x0, None)
            }
            ProblemSpec::Fh {
                n_samples,
                lambda,
                noise_sd,
                seed,
                x0,
            } => {
                let d = gen_fh(*n_samples, *lambda, *noise_sd, *seed, x0.clone())?;
                (Box::new(d.objective), d.h, d.bounds, d.x0, None)
            }
            &ProblemSpec::Bpdn {
                m,
                n,
                n_spikes,
                noise,
                seed,
            } => {
                let d = gen_bpdn(m, n, n_spikes, noise, seed)?;
                (Box::new(d.objective), d.h, d.bounds, d.x0, Some(d.x_star))
            }
        };
        if let Some(index) = bounds.first_boundary_violation(&x0) {
            return Err(SolverError::BoundaryPoint { index });
        }
        Ok(ProblemInstance {
            name: self.name().into(),
            spec: self.clone(),
            smooth,
            h,
            bounds,
            x0,
            x_star,
        })
    }
}

pub struct ProblemInstance {
    pub name: String,
    pub spec: ProblemSpec,
    pub smooth: Box<dyn SmoothObjective<f64>>,
    pub h: Regularizer<f64>,
    pub bounds: BoundBox<f64>,
    pub x0: Vec<f64>,
    pub x_star: Option<Vec<f64>>,
}

impl ProblemInstance {
    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    pub fn seed(&self) -> u64 {
        self.spec.seed()
    }
}

/// Largest relative mismatch between the oracle gradient and central
/// differences with step `step * max(1, |x_i|)`, measured as
/// `|g_i - fd_i| / max(1, |g|_inf)`.
pub fn gradient_check(obj: &dyn SmoothObjective<f64>, x: &[f64], step: f64) -> Result<f64, SolverError> {
    let mut g = vec![0.0; x.len()];
    obj.gradient(x, &mut g)?;
    let scale = g.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let mut xp = x.to_vec();
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        let hstep = step * x[i].abs().max(1.0);
        xp[i] = x[i] + hstep;
        let fp = obj.value(&xp)?;
        xp[i] = x[i] - hstep;
        let fm = obj.value(&xp)?;
        xp[i] = x[i];
        let fd = (fp - fm) / (2.0 * hstep);
        worst = worst.max((fd - g[i]).abs() / scale);
    }
    Ok(worst)
}
