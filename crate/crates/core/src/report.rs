//! Solver results and runtime invariant bookkeeping.

use serde::{Deserialize, Serialize};

use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Converged,
    MaxIter,
    Unbounded,
    OracleFailure,
}

/// Counts of runtime invariant checks and their violations.
///
/// Every solver fills the fields that apply to it; a run is "clean" when all
/// `*_violations` counters are zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: usize,
    pub outer_iterations: usize,
    pub successful_steps: usize,
    pub qn_skipped_updates: usize,
    pub interiority_violations: usize,
    pub dual_safeguard_violations: usize,
    pub descent_violations: usize,
    pub xi_bound_violations: usize,
    pub radius_violations: usize,
    pub step_cap_violations: usize,
    pub complementarity_exit_violations: usize,
    pub crossover_violations: usize,
    pub tolerance_exits: usize,
    pub inner_cap_exits: usize,
}

impl Diagnostics {
    pub fn total_violations(&self) -> usize {
        self.interiority_violations
            + self.dual_safeguard_violations
            + self.descent_violations
            + self.xi_bound_violations
            + self.radius_violations
            + self.step_cap_violations
            + self.complementarity_exit_violations
            + self.crossover_violations
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverReport<T: Scalar> {
    pub solver: String,
    pub x: Vec<T>,
    /// Multipliers of the finite lower bounds (zero where absent), barrier solvers only.
    pub z_lower: Option<Vec<T>>,
    pub z_upper: Option<Vec<T>>,
    #[serde(with = "lenient")]
    pub final_f: T,
    #[serde(with = "lenient")]
    pub final_h: T,
    #[serde(with = "lenient")]
    pub final_h_over_lambda: T,
    /// `sqrt(xi / nu)` at the last iteration.
    #[serde(with = "lenient")]
    pub final_criticality: T,
    #[serde(with = "lenient_opt")]
    pub dist_to_xstar: Option<T>,
    pub n_f: usize,
    pub n_grad: usize,
    pub n_prox: usize,
    pub wall_time_s: f64,
    /// `(gradient evaluations so far, f + h)` at every gradient evaluation.
    #[serde(with = "lenient_trace")]
    pub trace: Vec<(usize, T)>,
    pub termination: Termination,
    pub message: Option<String>,
    pub diagnostics: Diagnostics,
}

impl<T: Scalar> SolverReport<T> {
    pub fn objective(&self) -> T {
        self.final_f + self.final_h
    }
}

/// JSON has no NaN or infinity; those are written as the strings `"NaN"`,
/// `"inf"` and `"-inf"` and read back from either form.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Lenient {
    Num(f64),
    Text(String),
}

impl Lenient {
    fn from_value(v: f64) -> Self {
        if v.is_finite() {
            Lenient::Num(v)
        } else if v.is_nan() {
            Lenient::Text("NaN".into())
        } else if v > 0.0 {
            Lenient::Text("inf".into())
        } else {
            Lenient::Text("-inf".into())
        }
    }

    fn value<E: serde::de::Error>(self) -> Result<f64, E> {
        match self {
            Lenient::Num(v) => Ok(v),
            Lenient::Text(t) => match t.as_str() {
                "NaN" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                _ => Err(E::custom(format!("expected a number, got {t:?}"))),
            },
        }
    }
}

fn to_lenient<T: Scalar>(v: T) -> Lenient {
    Lenient::from_value(v.to_f64().unwrap_or(f64::NAN))
}

fn from_lenient<T: Scalar, E: serde::de::Error>(l: Lenient) -> Result<T, E> {
    let v = l.value::<E>()?;
    T::from_f64(v).ok_or_else(|| E::custom("value not representable"))
}

mod lenient {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<T: Scalar, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        to_lenient(*v).serialize(s)
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<T, D::Error> {
        from_lenient(Lenient::deserialize(d)?)
    }
}

mod lenient_opt {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<T: Scalar, S: Serializer>(v: &Option<T>, s: S) -> Result<S::Ok, S::Error> {
        v.map(to_lenient).serialize(s)
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<Option<T>, D::Error> {
        Option::<Lenient>::deserialize(d)?.map(from_lenient).transpose()
    }
}

mod lenient_trace {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<T: Scalar, S: Serializer>(v: &[(usize, T)], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|&(k, t)| (k, to_lenient(t))))
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<Vec<(usize, T)>, D::Error> {
        Vec::<(usize, Lenient)>::deserialize(d)?
            .into_iter()
            .map(|(k, l)| Ok((k, from_lenient(l)?)))
            .collect()
    }
}
