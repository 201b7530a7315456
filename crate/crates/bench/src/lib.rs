//! Benchmark harness: runs solver grids on the generated problems, then
//! writes reports, statistics tables and per-gradient objective traces.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use ripm::ipm::ipm_solve;
use ripm::linalg::dist2;
use ripm::problems::{ProblemInstance, ProblemSpec};
use ripm::r2::r2_solve;
use ripm::trust_region::{tr_solve, trdh_solve};
use ripm::{
    IpmOptions64, QnKind, QuasiNewtonOp, R2Options64, SolverError, SolverReport64, Termination,
    TrustRegionOptions64,
};
use serde::{Deserialize, Serialize};

/// Environment variable that replaces `output_dir` of every config.
pub const OUTPUT_DIR_ENV: &str = "RIPM_OUTPUT_DIR";

const REPORTS_FILE: &str = "reports.json";
const TABLE_FILE: &str = "table.txt";
const TRACE_DIR: &str = "traces";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolverName {
    #[serde(rename = "R2")]
    R2,
    #[serde(rename = "TRDH")]
    Trdh,
    #[serde(rename = "TR-R2")]
    TrR2,
    #[serde(rename = "RIPM-R2")]
    RipmR2,
    #[serde(rename = "RIPMDH")]
    Ripmdh,
    #[serde(rename = "RIPM-R2-p")]
    RipmR2P,
    #[serde(rename = "RIPMDH-p")]
    RipmdhP,
}

impl SolverName {
    pub const ALL: [SolverName; 7] = [
        SolverName::R2,
        SolverName::Trdh,
        SolverName::TrR2,
        SolverName::RipmR2,
        SolverName::Ripmdh,
        SolverName::RipmR2P,
        SolverName::RipmdhP,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SolverName::R2 => "R2",
            SolverName::Trdh => "TRDH",
            SolverName::TrR2 => "TR-R2",
            SolverName::RipmR2 => "RIPM-R2",
            SolverName::Ripmdh => "RIPMDH",
            SolverName::RipmR2P => "RIPM-R2-p",
            SolverName::RipmdhP => "RIPMDH-p",
        }
    }

    fn uses_quasi_newton(self) -> bool {
        matches!(self, SolverName::TrR2 | SolverName::RipmR2 | SolverName::RipmR2P)
    }
}

impl fmt::Display for SolverName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverName {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .with_context(|| format!("unknown solver {s:?}"))
    }
}

/// Per-solver option overrides; unset fields keep the solver defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub qn: Option<QnKind>,
    pub memory: Option<usize>,
    pub eps_a: Option<f64>,
    pub eps_r: Option<f64>,
    pub eps_ri: Option<f64>,
    pub mu0: Option<f64>,
    pub beta: Option<f64>,
    pub delta_init: Option<f64>,
    pub inner_cap: Option<usize>,
    pub kappa_bar: Option<f64>,
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverEntry {
    pub name: SolverName,
    #[serde(default)]
    pub overrides: Overrides,
}

/// A solver list item is either a bare name or `{"name": ..., "overrides": {...}}`.
#[derive(Deserialize)]
#[serde(untagged)]
enum EntryRepr {
    Name(SolverName),
    Full(SolverEntry),
}

fn entries<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<SolverEntry>, D::Error> {
    let raw = Vec::<EntryRepr>::deserialize(d)?;
    Ok(raw
        .into_iter()
        .map(|e| match e {
            EntryRepr::Name(name) => SolverEntry {
                name,
                overrides: Overrides::default(),
            },
            EntryRepr::Full(e) => e,
        })
        .collect())
}

fn all_solvers() -> Vec<SolverEntry> {
    SolverName::ALL
        .into_iter()
        .map(|name| SolverEntry {
            name,
            overrides: Overrides::default(),
        })
        .collect()
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    #[serde(default = "all_solvers", deserialize_with = "entries")]
    pub solvers: Vec<SolverEntry>,
    /// Maximum number of objective evaluations per solver.
    pub budget: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Overrides applied to every solver before its own.
    #[serde(default)]
    pub defaults: Overrides,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).context("invalid run config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            bail!("budget must be at least 1");
        }
        if self.solvers.is_empty() {
            bail!("no solvers configured");
        }
        Ok(())
    }

    /// `output_dir`, unless the environment overrides it.
    pub fn resolved_output_dir(&self) -> PathBuf {
        std::env::var_os(OUTPUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| self.output_dir.clone())
    }
}

/// Options after layering the problem preset, the config defaults and the
/// solver's own overrides.
#[derive(Debug, Clone, PartialEq)]
struct Settings {
    qn: QnKind,
    memory: usize,
    eps_a: f64,
    eps_r: f64,
    o: Overrides,
}

fn settings(problem: &ProblemSpec, defaults: &Overrides, own: &Overrides) -> Settings {
    let pick = |a: Option<f64>, b: Option<f64>| a.or(b);
    let o = Overrides {
        qn: own.qn.or(defaults.qn),
        memory: own.memory.or(defaults.memory),
        eps_a: pick(own.eps_a, defaults.eps_a),
        eps_r: pick(own.eps_r, defaults.eps_r),
        eps_ri: pick(own.eps_ri, defaults.eps_ri),
        mu0: pick(own.mu0, defaults.mu0),
        beta: pick(own.beta, defaults.beta),
        delta_init: pick(own.delta_init, defaults.delta_init),
        inner_cap: own.inner_cap.or(defaults.inner_cap),
        kappa_bar: pick(own.kappa_bar, defaults.kappa_bar),
        max_iter: own.max_iter.or(defaults.max_iter),
    };
    let (qn, eps_r) = match problem {
        ProblemSpec::Fh { .. } => (QnKind::Lbfgs, 1e-4),
        ProblemSpec::Nnmf { .. } => (QnKind::Lsr1, 1e-6),
        _ => (QnKind::Lsr1, 1e-4),
    };
    Settings {
        qn: o.qn.unwrap_or(qn),
        memory: o.memory.unwrap_or(5),
        eps_a: o.eps_a.unwrap_or(1e-4),
        eps_r: o.eps_r.unwrap_or(eps_r),
        o,
    }
}

fn tr_options(s: &Settings, budget: usize) -> TrustRegionOptions64 {
    let mut t = TrustRegionOptions64 {
        abs_tol: s.eps_a,
        rel_tol: s.eps_r,
        max_eval: Some(budget),
        ..Default::default()
    };
    if let Some(b) = s.o.beta {
        t.beta = b;
    }
    if let Some(d) = s.o.delta_init {
        t.delta_init = d;
    }
    if let Some(m) = s.o.max_iter {
        t.max_iter = m;
    }
    t
}

fn ipm_options(name: SolverName, s: &Settings, budget: usize) -> IpmOptions64 {
    let mut o = match name {
        SolverName::Ripmdh | SolverName::RipmdhP => IpmOptions64::ripmdh(),
        _ => IpmOptions64::ripm(),
    };
    if matches!(name, SolverName::RipmR2P | SolverName::RipmdhP) {
        o = o.with_p_preset();
    }
    o.eps_a = s.eps_a;
    o.eps_r = s.eps_r;
    o.max_eval = Some(budget);
    if let Some(v) = s.o.eps_ri {
        o.eps_ri = v;
    }
    if let Some(v) = s.o.mu0 {
        o.mu0 = v;
    }
    if let Some(v) = s.o.beta {
        o.tr.beta = v;
    }
    if let Some(v) = s.o.inner_cap {
        o.inner_cap = v;
    }
    if let Some(v) = s.o.kappa_bar {
        o.kappa_bar = v;
    }
    o
}

/// Runs one solver on a built instance. Invalid options come back as `Err`;
/// failures during the iteration are part of the report.
pub fn run_solver(
    inst: &ProblemInstance,
    entry: &SolverEntry,
    defaults: &Overrides,
    budget: usize,
) -> std::result::Result<SolverReport64, SolverError> {
    let s = settings(&inst.spec, defaults, &entry.overrides);
    let f = inst.smooth.as_ref();
    let n = inst.dim();
    let qn = if entry.name.uses_quasi_newton() {
        QuasiNewtonOp::new(s.qn, n, s.memory)
    } else {
        QuasiNewtonOp::spectral(n)
    };
    let mut report = match entry.name {
        SolverName::R2 => {
            let mut o = R2Options64 {
                abs_tol: s.eps_a,
                rel_tol: s.eps_r,
                max_eval: Some(budget),
                ..Default::default()
            };
            if let Some(m) = s.o.max_iter {
                o.max_iter = m;
            }
            r2_solve(f, &inst.h, &inst.bounds, &inst.x0, &o)?
        }
        SolverName::Trdh => trdh_solve(f, &inst.h, &inst.bounds, &inst.x0, &tr_options(&s, budget))?,
        SolverName::TrR2 => tr_solve(f, &inst.h, &inst.bounds, &inst.x0, qn, &tr_options(&s, budget))?,
        _ => ipm_solve(f, &inst.h, &inst.bounds, &inst.x0, qn, &ipm_options(entry.name, &s, budget))?,
    };
    report.solver = entry.name.to_string();
    report.dist_to_xstar = inst.x_star.as_ref().map(|xs| dist2(&report.x, xs));
    Ok(report)
}

fn hard_failure_report(inst: &ProblemInstance, name: SolverName, err: SolverError) -> SolverReport64 {
    let f0 = inst.smooth.value(&inst.x0).unwrap_or(f64::NAN);
    SolverReport64 {
        solver: name.to_string(),
        x: inst.x0.clone(),
        z_lower: None,
        z_upper: None,
        final_f: f64::NAN,
        final_h: f64::NAN,
        final_h_over_lambda: f64::NAN,
        final_criticality: f64::NAN,
        dist_to_xstar: None,
        n_f: 0,
        n_grad: 0,
        n_prox: 0,
        wall_time_s: 0.0,
        trace: vec![(0, f0 + inst.h.value(&inst.x0))],
        termination: Termination::OracleFailure,
        message: Some(err.to_string()),
        diagnostics: Default::default(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunResults {
    pub problem: ProblemSpec,
    pub budget: usize,
    /// Smallest final `f + h` over the solvers, the reference for objective gaps.
    pub best: f64,
    pub reports: Vec<SolverReport64>,
}

impl RunResults {
    pub fn has_x_star(&self) -> bool {
        self.reports.iter().any(|r| r.dist_to_xstar.is_some())
    }

    pub fn any_hard_failure(&self) -> bool {
        self.reports
            .iter()
            .any(|r| r.termination == Termination::OracleFailure)
    }

    pub fn report(&self, name: SolverName) -> Option<&SolverReport64> {
        self.reports.iter().find(|r| r.solver == name.as_str())
    }
}

/// Builds the instance once and runs every configured solver, in parallel,
/// keeping the config order in the result.
pub fn run(cfg: &RunConfig) -> Result<RunResults> {
    cfg.validate()?;
    let inst = cfg.problem.build().context("building problem instance")?;
    let reports: Vec<SolverReport64> = cfg
        .solvers
        .par_iter()
        .map(|e| {
            run_solver(&inst, e, &cfg.defaults, cfg.budget)
                .unwrap_or_else(|err| hard_failure_report(&inst, e.name, err))
        })
        .collect();
    let best = reports
        .iter()
        .map(|r| r.objective())
        .filter(|v| v.is_finite())
        .fold(f64::INFINITY, f64::min);
    Ok(RunResults {
        problem: cfg.problem.clone(),
        budget: cfg.budget,
        best,
        reports,
    })
}

/// `v` in the `d.dde-xx` style, with `digits` significant digits.
pub fn sci(v: f64, digits: usize) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{:.*e}", digits.saturating_sub(1), v);
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", exp.abs())
}

pub fn emit_table(res: &RunResults) -> String {
    let with_dist = res.has_x_star();
    let mut header = vec!["solver", "f(x)", "h(x)/lambda", "sqrt(xi/nu)"];
    if with_dist {
        header.push("||x-x*||");
    }
    header.extend(["#f", "#grad f", "#prox", "t(s)"]);
    let rows: Vec<Vec<String>> = res
        .reports
        .iter()
        .map(|r| {
            let mut row = vec![
                r.solver.clone(),
                sci(r.final_f, 3),
                sci(r.final_h_over_lambda, 2),
                sci(r.final_criticality, 2),
            ];
            if with_dist {
                row.push(r.dist_to_xstar.map_or_else(|| "-".into(), |d| sci(d, 2)));
            }
            row.extend([
                r.n_f.to_string(),
                r.n_grad.to_string(),
                r.n_prox.to_string(),
                sci(r.wall_time_s, 2),
            ]);
            row
        })
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|j| rows.iter().map(|r| r[j].len()).chain([header[j].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: Vec<&str>| -> String {
        let parts: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(j, c)| if j == 0 { format!("{c:<w$}", w = widths[j]) } else { format!("{c:>w$}", w = widths[j]) })
            .collect();
        parts.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(header.clone());
    for row in &rows {
        out += &line(row.iter().map(String::as_str).collect());
    }
    out
}

/// Trace CSV of one report: `n_grad,objective_gap` rows relative to `best`.
pub fn emit_trace_csv(report: &SolverReport64, best: f64) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["n_grad", "objective_gap"])?;
    for &(k, v) in &report.trace {
        w.write_record([k.to_string(), format!("{:?}", v - best)])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn trace_file_name(solver: &str) -> String {
    format!("{solver}.csv")
}

/// Writes the trace CSVs and returns their paths.
pub fn write_traces(res: &RunResults, dir: &Path) -> Result<Vec<PathBuf>> {
    let tdir = dir.join(TRACE_DIR);
    fs::create_dir_all(&tdir).with_context(|| format!("creating {}", tdir.display()))?;
    res.reports
        .iter()
        .map(|r| {
            let p = tdir.join(trace_file_name(&r.solver));
            fs::write(&p, emit_trace_csv(r, res.best)?).with_context(|| format!("writing {}", p.display()))?;
            Ok(p)
        })
        .collect()
}

/// Writes `reports.json`, `table.txt` and the traces into `dir`.
pub fn write_results(res: &RunResults, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let json = serde_json::to_string_pretty(res)?;
    fs::write(dir.join(REPORTS_FILE), json)?;
    fs::write(dir.join(TABLE_FILE), emit_table(res))?;
    write_traces(res, dir)?;
    Ok(())
}

pub fn read_results(dir: &Path) -> Result<RunResults> {
    let p = dir.join(REPORTS_FILE);
    let text = fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sci_matches_table_style() {
        assert_eq!(sci(0.0391, 3), "3.91e-02");
        assert_eq!(sci(8.7, 2), "8.7e+00");
        assert_eq!(sci(-6893.659, 3), "-6.89e+03");
        assert_eq!(sci(0.0, 2), "0.0e+00");
        assert_eq!(sci(1e-120, 2), "1.0e-120");
    }

    #[test]
    fn solver_names_round_trip() {
        for n in SolverName::ALL {
            assert_eq!(n.as_str().parse::<SolverName>().unwrap(), n);
            let j = serde_json::to_string(&n).unwrap();
            assert_eq!(j, format!("\"{n}\""));
        }
        assert!("TR".parse::<SolverName>().is_err());
    }

    #[test]
    fn config_accepts_names_and_entries() {
        let cfg = RunConfig::from_json(
            r#"{"problem": {"kind": "qp", "n": 10, "p": 0.3, "seed": 1},
                "solvers": ["R2", {"name": "TR-R2", "overrides": {"qn": "Lbfgs"}}],
                "budget": 50}"#,
        )
        .unwrap();
        assert_eq!(cfg.solvers.len(), 2);
        assert_eq!(cfg.solvers[1].overrides.qn, Some(QnKind::Lbfgs));
        assert_eq!(cfg.output_dir, PathBuf::from("results"));
        let all = RunConfig::from_json(r#"{"problem": {"kind": "qp", "n": 10, "p": 0.3, "seed": 1}, "budget": 5}"#).unwrap();
        assert_eq!(all.solvers.len(), 7);
    }

    #[test]
    fn config_errors() {
        let base = r#"{"problem": {"kind": "qp", "n": 10, "p": 0.3, "seed": 1}, "budget": 0}"#;
        assert!(RunConfig::from_json(base).is_err());
        assert!(RunConfig::from_json(r#"{"problem": {"kind": "qp", "n": 10, "p": 0.3, "seed": 1}, "budget": 3, "solvers": ["TR"]}"#).is_err());
        assert!(RunConfig::from_json(r#"{"problem": {"kind": "qp", "n": 10, "p": 0.3, "seed": 1}, "budget": 3, "bogus": 1}"#).is_err());
    }

    #[test]
    fn nnmf_preset_and_layering() {
        let spec = ProblemSpec::nnmf(4, 3, 2, 1);
        let s = settings(&spec, &Overrides::default(), &Overrides::default());
        assert_eq!(s.eps_r, 1e-6);
        assert_eq!(s.qn, QnKind::Lsr1);
        let d = Overrides { eps_r: Some(1e-3), memory: Some(3), ..Default::default() };
        let own = Overrides { eps_r: Some(1e-2), ..Default::default() };
        let s = settings(&spec, &d, &own);
        assert_eq!((s.eps_r, s.memory), (1e-2, 3));
        let fh = settings(&ProblemSpec::fh(10, 0), &Overrides::default(), &Overrides::default());
        assert_eq!((fh.qn, fh.eps_r), (QnKind::Lbfgs, 1e-4));
    }

    #[test]
    fn p_preset_applied() {
        let s = settings(&ProblemSpec::qp(5, 0.5, 1), &Overrides::default(), &Overrides::default());
        let o = ipm_options(SolverName::RipmdhP, &s, 10);
        assert_eq!((o.mu0, o.eps_ri), (1e-3, 1.0));
        let o = ipm_options(SolverName::RipmR2, &s, 10);
        assert_eq!((o.mu0, o.eps_ri), (1.0, 0.1));
    }
}
