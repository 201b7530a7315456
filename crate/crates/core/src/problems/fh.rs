//! Parameter fit of the FitzHugh-Nagumo model
//!
//! ```text
//! V' = (V - V^3/3 - W + x1) / x2,   W' = x2 (x3 V - x4 W + x5),   (V, W)(0) = (2, 0)
//! ```
//!
//! on `t in [0, 20]` against data generated at `x_bar` plus seeded Gaussian
//! measurement noise, with `h = lambda ||x||_0` and `x2 >= 0.5`.
//!
//! The ODE is integrated with fixed-step RK4; the gradient integrates the
//! forward sensitivity system with the same scheme, so it is the exact
//! gradient of the discretized objective.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::SolverError;
use crate::oracle::SmoothObjective;
use crate::regprox::{BoundBox, Regularizer};

pub const T_END: f64 = 20.0;
pub const RK4_STEPS: usize = 2000;
pub const BLOWUP: f64 = 1e8;
/// Parameters producing the data: the Van der Pol oscillator with `mu = 5`.
pub const X_BAR: [f64; 5] = [0.0, 0.2, 1.0, 0.0, 0.0];
/// Default standard deviation of the noise added to every sample of `V` and `W`.
pub const DEFAULT_NOISE_SD: f64 = 0.1;

const NP: usize = 5;
/// `(V, W, dV/dx, dW/dx)`.
type State = [f64; 2 + 2 * NP];

fn rhs(x: &[f64], y: &State, sens: bool) -> State {
    let (v, w) = (y[0], y[1]);
    let core = v - v * v * v / 3.0 - w + x[0];
    let mut d = [0.0; 2 + 2 * NP];
    d[0] = core / x[1];
    d[1] = x[1] * (x[2] * v - x[3] * w + x[4]);
    if sens {
        let (sv, sw) = (&y[2..2 + NP], &y[2 + NP..]);
        let fvv = (1.0 - v * v) / x[1];
        let fvw = -1.0 / x[1];
        let fwv = x[1] * x[2];
        let fww = -x[1] * x[3];
        for j in 0..NP {
            d[2 + j] = fvv * sv[j] + fvw * sw[j];
            d[2 + NP + j] = fwv * sv[j] + fww * sw[j];
        }
        d[2] += 1.0 / x[1];
        d[3] -= core / (x[1] * x[1]);
        d[2 + NP + 1] += x[2] * v - x[3] * w + x[4];
        d[2 + NP + 2] += x[1] * v;
        d[2 + NP + 3] -= x[1] * w;
        d[2 + NP + 4] += x[1];
    }
    d
}

fn rk4_step(x: &[f64], y: &State, dt: f64, sens: bool) -> State {
    let len = if sens { 2 + 2 * NP } else { 2 };
    let add = |a: &State, b: &State, s: f64| {
        let mut o = *a;
        for i in 0..len {
            o[i] += s * b[i];
        }
        o
    };
    let k1 = rhs(x, y, sens);
    let k2 = rhs(x, &add(y, &k1, dt / 2.0), sens);
    let k3 = rhs(x, &add(y, &k2, dt / 2.0), sens);
    let k4 = rhs(x, &add(y, &k3, dt), sens);
    let mut o = *y;
    for i in 0..len {
        o[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    o
}

/// Samples `(V, W)` (and sensitivities) at `n_samples + 1` equispaced times,
/// or `None` when the state leaves `[-1e8, 1e8]` or stops being finite.
fn simulate(x: &[f64], n_samples: usize, sens: bool) -> Option<Vec<State>> {
    let every = RK4_STEPS / n_samples;
    let dt = T_END / RK4_STEPS as f64;
    let mut y: State = [0.0; 2 + 2 * NP];
    y[0] = 2.0;
    let mut out = Vec::with_capacity(n_samples + 1);
    out.push(y);
    for step in 1..=RK4_STEPS {
        y = rk4_step(x, &y, dt, sens);
        let len = if sens { y.len() } else { 2 };
        if y[..len].iter().any(|v| !v.is_finite() || v.abs() > BLOWUP) {
            return None;
        }
        if step % every == 0 {
            out.push(y);
        }
    }
    Some(out)
}

pub struct FhObjective {
    pub n_samples: usize,
    pub v_data: Vec<f64>,
    pub w_data: Vec<f64>,
}

impl FhObjective {
    pub fn new(n_samples: usize, x_bar: &[f64], noise_sd: f64, seed: u64) -> Result<Self, SolverError> {
        if n_samples < 2 || RK4_STEPS % n_samples != 0 {
            return Err(SolverError::InvalidOptions(format!(
                "n_samples must be at least 2 and divide {RK4_STEPS}, got {n_samples}"
            )));
        }
        let traj = simulate(x_bar, n_samples, false)
            .ok_or_else(|| SolverError::OracleFailure("data trajectory blew up".into()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut noisy = |v: f64| {
            let e: f64 = rng.sample(StandardNormal);
            v + noise_sd * e
        };
        let v_data = traj.iter().map(|y| noisy(y[0])).collect();
        let w_data = traj.iter().map(|y| noisy(y[1])).collect();
        Ok(Self {
            n_samples,
            v_data,
            w_data,
        })
    }
}

impl SmoothObjective<f64> for FhObjective {
    fn dim(&self) -> usize {
        NP
    }

    fn value(&self, x: &[f64]) -> Result<f64, SolverError> {
        Ok(match simulate(x, self.n_samples, false) {
            None => f64::INFINITY,
            Some(traj) => {
                0.5 * traj
                    .iter()
                    .zip(self.v_data.iter().zip(&self.w_data))
                    .map(|(y, (&v, &w))| (y[0] - v).powi(2) + (y[1] - w).powi(2))
                    .sum::<f64>()
            }
        })
    }

    fn gradient(&self, x: &[f64], g: &mut [f64]) -> Result<(), SolverError> {
        let traj = simulate(x, self.n_samples, true)
            .ok_or_else(|| SolverError::OracleFailure("ODE solution blew up".into()))?;
        g.iter_mut().for_each(|v| *v = 0.0);
        for (y, (&v, &w)) in traj.iter().zip(self.v_data.iter().zip(&self.w_data)) {
            let (rv, rw) = (y[0] - v, y[1] - w);
            for j in 0..NP {
                g[j] += rv * y[2 + j] + rw * y[2 + NP + j];
            }
        }
        Ok(())
    }
}

pub struct FhData {
    pub objective: FhObjective,
    pub h: Regularizer<f64>,
    pub bounds: BoundBox<f64>,
    pub x0: Vec<f64>,
}

/// Default starting point; strictly above the bound on `x2`.
pub const DEFAULT_X0: [f64; 5] = [0.5, 1.0, 0.5, 0.5, 0.5];

pub fn gen_fh(
    n_samples: usize,
    lambda: f64,
    noise_sd: f64,
    seed: u64,
    x0: Option<Vec<f64>>,
) -> Result<FhData, SolverError> {
    if !(noise_sd >= 0.0) {
        return Err(SolverError::InvalidOptions(format!("noise_sd must be nonnegative, got {noise_sd}")));
    }
    let objective = FhObjective::new(n_samples, &X_BAR, noise_sd, seed)?;
    let inf = f64::INFINITY;
    let bounds = BoundBox::new(vec![-inf, 0.5, -inf, -inf, -inf], vec![inf; NP])?;
    let x0 = x0.unwrap_or_else(|| DEFAULT_X0.to_vec());
    if x0.len() != NP {
        return Err(SolverError::DimensionMismatch {
            expected: NP,
            got: x0.len(),
        });
    }
    Ok(FhData {
        objective,
        h: Regularizer::new(crate::regprox::RegKind::L0, lambda)?,
        bounds,
        x0,
    })
}
