//! Acceptance suite: one pass/fail line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use ripm::ipm::{inner_solve, ipm_solve, BarrierState, DualEstimate, InnerExit};
use ripm::problems::{gradient_check, ProblemSpec};
use ripm::regprox::{iprox_shifted, prox_separable};
use ripm::*;
use ripm_bench::{run, Overrides, RunConfig, RunResults, SolverEntry, SolverName};

type Outcome = Result<String, String>;

fn config(problem: ProblemSpec, solvers: &[SolverName], budget: usize) -> RunConfig {
    RunConfig {
        problem,
        solvers: solvers
            .iter()
            .map(|&name| SolverEntry {
                name,
                overrides: Overrides::default(),
            })
            .collect(),
        budget,
        output_dir: "unused".into(),
        defaults: Overrides::default(),
    }
}

fn timed(cfg: &RunConfig) -> (RunResults, Duration) {
    let t = Instant::now();
    let r = run(cfg).expect("benchmark run");
    (r, t.elapsed())
}

fn get(res: &RunResults, name: SolverName) -> &SolverReport64 {
    res.report(name).expect("solver present")
}

fn check(failures: Vec<String>, ok: String) -> Outcome {
    if failures.is_empty() {
        Ok(ok)
    } else {
        Err(failures.join("; "))
    }
}

fn fh(runs: &mut Vec<RunResults>) -> Outcome {
    use SolverName::*;
    let (res, t) = timed(&config(ProblemSpec::fh(100, 0), &[TrR2, RipmR2, Ripmdh], 1000));
    let mut bad = Vec::new();
    let mut fs = Vec::new();
    for r in &res.reports {
        let nz = r.x.iter().filter(|v| **v != 0.0).count();
        let ok = nz == 2
            && (r.x[1] - 0.5).abs() <= 1e-6
            && r.final_h_over_lambda == 2.0
            && (4.0..=5.0).contains(&r.final_f)
            && matches!(r.termination, Termination::Converged | Termination::MaxIter);
        if !ok {
            bad.push(format!("{} x={:?} h/l={} f={} {:?}", r.solver, r.x, r.final_h_over_lambda, r.final_f, r.termination));
        }
        fs.push(format!("{} f={:.3} {:?}", r.solver, r.final_f, r.termination));
    }
    if t > Duration::from_secs(300) {
        bad.push(format!("runtime {t:?}"));
    }
    runs.push(res);
    check(bad, fs.join(", "))
}

fn bpdn(runs: &mut Vec<RunResults>) -> Outcome {
    use SolverName::*;
    let mut bad = Vec::new();
    let mut total = Duration::ZERO;
    let (mut dmin, mut dmax, mut nf_max, mut spread_max) = (f64::INFINITY, 0.0f64, 0, 0.0f64);
    for seed in 1..=5 {
        let (res, t) = timed(&config(ProblemSpec::bpdn(200, 512, seed), &[R2, Trdh, TrR2, Ripmdh, RipmdhP], 1000));
        total += t;
        let objs: Vec<f64> = res.reports.iter().map(|r| r.objective()).collect();
        let lo = objs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = objs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let spread = (hi - lo) / lo.abs();
        spread_max = spread_max.max(spread);
        if !(spread <= 0.05) {
            bad.push(format!("seed {seed}: f+h spread {spread:.3e}"));
        }
        let p = get(&res, RipmdhP);
        nf_max = nf_max.max(p.n_f);
        if p.termination != Termination::Converged || p.n_f > 60 {
            bad.push(format!("seed {seed}: RIPMDH-p {:?} n_f={}", p.termination, p.n_f));
        }
        for r in &res.reports {
            let d = r.dist_to_xstar.unwrap_or(f64::NAN);
            dmin = dmin.min(d);
            dmax = dmax.max(d);
            if !(0.2..=0.8).contains(&d) {
                bad.push(format!("seed {seed}: {} ||x-x*||={d:.3}", r.solver));
            }
        }
        runs.push(res);
    }
    if total > Duration::from_secs(60) {
        bad.push(format!("runtime {total:?}"));
    }
    check(
        bad,
        format!("spread <= {spread_max:.1e}, RIPMDH-p n_f <= {nf_max}, ||x-x*|| in [{dmin:.3}, {dmax:.3}], {:.1}s", total.as_secs_f64()),
    )
}

fn qp(runs: &mut Vec<RunResults>) -> Outcome {
    let mut bad = Vec::new();
    let mut wins = 0;
    for seed in 1..=5 {
        let (res, _) = timed(&config(ProblemSpec::qp(1000, 0.01, seed), &SolverName::ALL, 800));
        for r in &res.reports {
            if !matches!(r.termination, Termination::Converged | Termination::MaxIter) {
                bad.push(format!("seed {seed}: {} {:?}", r.solver, r.termination));
            }
        }
        let a = get(&res, SolverName::Ripmdh).objective();
        let b = get(&res, SolverName::Trdh).objective();
        if a <= b + 0.01 * b.abs() {
            wins += 1;
        }
        runs.push(res);
    }
    if wins < 3 {
        bad.push(format!("RIPMDH within 1% of TRDH on {wins}/5 seeds"));
    }
    check(bad, format!("RIPMDH <= TRDH + 1% on {wins}/5 seeds"))
}

fn nnmf(runs: &mut Vec<RunResults>) -> Outcome {
    use SolverName::*;
    let budget = 8000;
    let (res, t) = timed(&config(ProblemSpec::nnmf(100, 50, 5, 1), &[Trdh, TrR2, RipmR2, Ripmdh], budget));
    let mut bad = Vec::new();
    let tr = get(&res, TrR2).objective();
    for name in [Trdh, TrR2] {
        let r = get(&res, name);
        if r.termination != Termination::MaxIter || r.n_f <= budget {
            bad.push(format!("{name} {:?} n_f={}", r.termination, r.n_f));
        }
    }
    for name in [RipmR2, Ripmdh] {
        let r = get(&res, name);
        if r.termination != Termination::Converged || r.n_f > budget {
            bad.push(format!("{name} did not converge ({:?}, n_f={})", r.termination, r.n_f));
        }
        if !(r.objective() <= tr) {
            bad.push(format!("{name} f+h={:.4} > TR-R2 {tr:.4}", r.objective()));
        }
    }
    if t > Duration::from_secs(300) {
        bad.push(format!("runtime {t:?}"));
    }
    let summary: Vec<String> = res
        .reports
        .iter()
        .map(|r| format!("{} f+h={:.4} n_f={} {:?}", r.solver, r.objective(), r.n_f, r.termination))
        .collect();
    runs.push(res);
    check(bad, summary.join(", "))
}

fn grid_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> f64 {
    let n = ((hi - lo) / step).ceil() as usize;
    (0..=n).map(|i| f((lo + i as f64 * step).min(hi))).fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone)]
struct ProxCase {
    kind: RegKind,
    lambda: f64,
    shifted: bool,
    comps: Vec<(f64, f64, f64, f64, f64)>,
}

fn prox_case() -> impl Strategy<Value = ProxCase> {
    let kind = prop_oneof![Just(RegKind::L1), Just(RegKind::L0), Just(RegKind::Zero)];
    (kind, 0.0..5.0f64, any::<bool>(), 1usize..4).prop_flat_map(|(kind, lambda, shifted, n)| {
        let dlo = if shifted { -3.0 } else { 0.05 };
        let comp = (dlo..10.0f64, -15.0..15.0f64, -8.0..8.0f64, -10.0..0.0f64, 0.0..10.0f64);
        proptest::collection::vec(comp, n).prop_map(move |comps| ProxCase {
            kind,
            lambda,
            shifted,
            comps,
        })
    })
}

fn prox_grid() -> Outcome {
    let cases = 1000;
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    let worst = std::cell::Cell::new(0.0f64);
    let res = runner.run(&prox_case(), |c| {
        let h = Regularizer::new(c.kind, c.lambda).unwrap();
        let d: Vec<f64> = c.comps.iter().map(|t| t.0).collect();
        let q: Vec<f64> = c.comps.iter().map(|t| t.1).collect();
        let x: Vec<f64> = if c.shifted { c.comps.iter().map(|t| t.2).collect() } else { vec![0.0; d.len()] };
        let lo: Vec<f64> = c.comps.iter().map(|t| t.3).collect();
        let hi: Vec<f64> = c.comps.iter().map(|t| t.3 + t.4).collect();
        let bx = IntervalSet::new(lo.clone(), hi.clone()).unwrap();
        let s = if c.shifted {
            iprox_shifted(&h, &d, &q, &x, &bx).unwrap()
        } else {
            prox_separable(&h, &d, &q, &bx).unwrap()
        };
        prop_assert!(bx.contains(&s));
        let comp = |i: usize, v: f64| 0.5 * d[i] * (v - q[i]).powi(2) + h.component(i, x[i] + v);
        let got: f64 = (0..d.len()).map(|i| comp(i, s[i])).sum();
        let oracle: f64 = (0..d.len()).map(|i| grid_min(|v| comp(i, v), lo[i], hi[i], 1e-4)).sum();
        worst.set(worst.get().max(got - oracle));
        prop_assert!(got <= oracle + 1e-6, "gap {}", got - oracle);
        Ok(())
    });
    match res {
        Ok(()) => Ok(format!("{cases} cases, worst excess over grid {:.1e}", worst.get())),
        Err(e) => Err(e.to_string()),
    }
}

fn invariants(runs: &[RunResults]) -> Outcome {
    let mut bad = Vec::new();
    let mut count = 0;
    for res in runs {
        let inst = res.problem.build().expect("instance");
        for r in &res.reports {
            count += 1;
            if r.diagnostics.total_violations() > 0 {
                bad.push(format!("{} on {}: {:?}", r.solver, inst.name, r.diagnostics));
            }
            if let (Some(zl), Some(zu)) = (&r.z_lower, &r.z_upper) {
                for i in 0..r.x.len() {
                    let gl = r.x[i] - inst.bounds.lower[i];
                    let gu = inst.bounds.upper[i] - r.x[i];
                    if (gl.is_finite() && gl * zl[i] != 0.0) || (gu.is_finite() && gu * zu[i] != 0.0) {
                        bad.push(format!("{} on {}: gap*z != 0 at {i}", r.solver, inst.name));
                        break;
                    }
                }
            }
        }
    }
    check(bad, format!("{count} benchmark reports clean"))
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a) > 0.0;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (f(m) > 0.0) == fa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn barrier_path() -> Outcome {
    let mut bad = Vec::new();
    let quad = FnObjective::new(1, |x: &[f64]| 0.5 * (x[0] - 2.0).powi(2), |x: &[f64], g: &mut [f64]| g[0] = x[0] - 2.0);
    let flat = FnObjective::new(1, |_: &[f64]| 0.0, |_: &[f64], g: &mut [f64]| g[0] = 0.0);
    let b = BoundBox::nonnegative(1);
    let mut worst = 0.0f64;
    for variant in [IpmVariant::R2Subsolver, IpmVariant::DiagonalHessian] {
        let opts = IpmOptions { variant, eps_ri: 0.0, inner_cap: 500, ..IpmOptions::default() };
        let cases: [(&dyn SmoothObjective<f64>, Regularizer64, f64, f64); 6] = [
            (&quad, Regularizer::zero(), 1.0, bisect(|x| x - 2.0 - 1.0 / x, 1e-12, 10.0)),
            (&quad, Regularizer::zero(), 0.1, bisect(|x| x - 2.0 - 0.1 / x, 1e-12, 10.0)),
            (&quad, Regularizer::zero(), 1e-3, bisect(|x| x - 2.0 - 1e-3 / x, 1e-12, 10.0)),
            (&flat, Regularizer::l1(1.0), 0.5, 0.5),
            (&flat, Regularizer::l1(2.0), 0.5, 0.25),
            (&flat, Regularizer::l1(1.0), 0.05, 0.05),
        ];
        for (f, h, mu, expected) in cases {
            let state = BarrierState { mu, delta_frac: 0.05, eps_d: 1e-8, eps_p: 1e-8, outer_index: 0 };
            let mut qn = QuasiNewtonOp::spectral(1);
            let (out, _) = inner_solve(f, &h, &b, &mut qn, &state, &[1.0], &DualEstimate::ones(&b), 1000.0 * mu, &opts)
                .expect("inner solve");
            let err = (out.x[0] - expected).abs();
            worst = worst.max(err);
            if out.exit != InnerExit::Tolerance || err > 1e-6 {
                bad.push(format!("{variant:?} mu={mu}: x={} expected {expected} ({:?})", out.x[0], out.exit));
            }
        }
    }
    let mut limit = 0.0f64;
    for opts in [IpmOptions::ripm(), IpmOptions::ripmdh()] {
        let r = ipm_solve(&quad, &Regularizer::zero(), &b, &[1.0], QuasiNewtonOp::lsr1(1, 5), &opts).expect("solve");
        let err = (r.x[0] - 2.0).abs();
        limit = limit.max(err);
        if r.termination != Termination::Converged || err > 1e-3 {
            bad.push(format!("{} limit x={} {:?}", r.solver, r.x[0], r.termination));
        }
    }
    check(bad, format!("per-mu error <= {worst:.1e}, limit error <= {limit:.1e}"))
}

fn gradients() -> Outcome {
    let specs = [
        (ProblemSpec::qp(40, 0.2, 1), vec![]),
        (ProblemSpec::nnmf(8, 6, 2, 2), vec![]),
        (ProblemSpec::bpdn(10, 25, 3), vec![]),
        (ProblemSpec::fh(100, 1), vec![0.1, 0.9, 0.6, -0.1, 0.2]),
    ];
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    for (spec, point) in specs {
        let inst = spec.build().expect("instance");
        let x = if point.is_empty() {
            inst.x0.iter().enumerate().map(|(i, v)| v + 0.01 * ((i % 7) as f64)).collect()
        } else {
            point
        };
        match gradient_check(inst.smooth.as_ref(), &x, 1e-6) {
            Ok(e) if e <= 1e-4 => worst = worst.max(e),
            Ok(e) => bad.push(format!("{}: {e:.1e}", inst.name)),
            Err(e) => bad.push(format!("{}: {e}", inst.name)),
        }
    }
    check(bad, format!("worst relative error {worst:.1e}"))
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut runs = Vec::new();
    let results: Vec<(&str, Outcome)> = vec![
        ("FH recovery", fh(&mut runs)),
        ("BPDN", bpdn(&mut runs)),
        ("QP reduced scale", qp(&mut runs)),
        ("NNMF paper scale", nnmf(&mut runs)),
        ("prox oracle suite", prox_grid()),
        ("invariant suite", invariants(&runs)),
        ("barrier-path oracle", barrier_path()),
        ("gradient checks", gradients()),
    ];
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(msg) => println!("PASS {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {name}: {msg}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
