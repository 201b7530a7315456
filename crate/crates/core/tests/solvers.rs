use proptest::prelude::*;
use ripm::ipm::{inner_solve, ipm_solve, BarrierState, DualEstimate, InnerExit};
use ripm::r2::r2_solve;
use ripm::trust_region::{tr_solve, trdh_solve};
use ripm::*;

fn quad(n: usize, c: f64) -> FnObjective<impl Fn(&[f64]) -> f64 + Sync, impl Fn(&[f64], &mut [f64]) + Sync> {
    FnObjective::new(
        n,
        move |x: &[f64]| x.iter().map(|v| 0.5 * (v - c) * (v - c)).sum(),
        move |x: &[f64], g: &mut [f64]| {
            for (gi, v) in g.iter_mut().zip(x) {
                *gi = v - c;
            }
        },
    )
}

/// Brute-force minimizer of a 1-D function on `[lo, hi]`.
fn grid_argmin(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    (0..=n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .min_by(|a, b| f(*a).partial_cmp(&f(*b)).unwrap())
        .unwrap()
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

#[test]
fn r2_unconstrained_quadratic() {
    let f = quad(1, 0.0);
    let r = r2_solve(&f, &Regularizer::zero(), &BoundBox::unbounded(1), &[4.0], &R2Options::default()).unwrap();
    assert_eq!(r.termination, Termination::Converged);
    assert!(r.x[0].abs() < 1e-3);
    assert!(r.trace.windows(2).all(|w| w[1].1 <= w[0].1));
    assert_eq!(r.diagnostics.total_violations(), 0);
}

#[test]
fn r2_soft_threshold_fixed_point() {
    let f = quad(1, 2.0);
    let h = Regularizer::l1(1.0);
    let r = r2_solve(&f, &h, &BoundBox::unbounded(1), &[0.0], &R2Options::default()).unwrap();
    let oracle = grid_argmin(|x| 0.5 * (x - 2.0) * (x - 2.0) + x.abs(), -1.0, 3.0, 400_000);
    assert!((r.x[0] - oracle).abs() < 1e-3, "{} vs {oracle}", r.x[0]);
}

#[test]
fn r2_active_bound() {
    let f = quad(1, -1.0);
    let r = r2_solve(&f, &Regularizer::zero(), &BoundBox::nonnegative(1), &[1.0], &R2Options::default()).unwrap();
    assert_eq!(r.x, vec![0.0]);
    assert_eq!(r.n_prox, r.diagnostics.iterations);
}

#[test]
fn tr_and_trdh_interior_minimum() {
    let f = quad(4, 1.0);
    let b = BoundBox::nonnegative(4);
    let x0 = [0.5; 4];
    let o = TrustRegionOptions::default();
    let a = tr_solve(&f, &Regularizer::zero(), &b, &x0, QuasiNewtonOp::lbfgs(4, 5), &o).unwrap();
    let d = trdh_solve(&f, &Regularizer::zero(), &b, &x0, &o).unwrap();
    for r in [a, d] {
        assert_eq!(r.termination, Termination::Converged, "{}", r.solver);
        assert!(r.x.iter().all(|v| (v - 1.0).abs() < 1e-3), "{}: {:?}", r.solver, r.x);
        assert_eq!(r.diagnostics.total_violations(), 0);
    }
}

#[test]
fn tr_and_trdh_fully_active_bounds() {
    let f = quad(3, -1.0);
    let b = BoundBox::nonnegative(3);
    let o = TrustRegionOptions::default();
    let a = tr_solve(&f, &Regularizer::zero(), &b, &[1.0; 3], QuasiNewtonOp::lsr1(3, 5), &o).unwrap();
    let d = trdh_solve(&f, &Regularizer::zero(), &b, &[1.0; 3], &o).unwrap();
    assert_eq!(a.x, vec![0.0; 3]);
    assert_eq!(d.x, vec![0.0; 3]);
}

#[test]
fn tr_l1_one_dimensional() {
    let f = quad(1, 2.0);
    let h = Regularizer::l1(1.0);
    let oracle = grid_argmin(|x| 0.5 * (x - 2.0) * (x - 2.0) + x.abs(), -1.0, 3.0, 400_000);
    let o = TrustRegionOptions::default();
    let a = tr_solve(&f, &h, &BoundBox::unbounded(1), &[0.0], QuasiNewtonOp::lbfgs(1, 5), &o).unwrap();
    let d = trdh_solve(&f, &h, &BoundBox::unbounded(1), &[0.0], &o).unwrap();
    assert!((a.x[0] - oracle).abs() < 1e-3);
    assert!((d.x[0] - oracle).abs() < 1e-3);
}

#[test]
fn l1_barrier_point_is_mu_over_lambda() {
    let f = FnObjective::new(3, |_: &[f64]| 0.0, |_: &[f64], g: &mut [f64]| g.fill(0.0));
    let b = BoundBox::nonnegative(3);
    let h = Regularizer::l1(1.0);
    for variant in [IpmVariant::R2Subsolver, IpmVariant::DiagonalHessian] {
        let opts = IpmOptions { variant, eps_ri: 0.0, inner_cap: 500, ..IpmOptions::default() };
        for mu in [0.5, 0.05] {
            let state = BarrierState { mu, delta_frac: 0.05, eps_d: 1e-7, eps_p: 1e-7, outer_index: 0 };
            let mut qn = QuasiNewtonOp::spectral(3);
            let (out, diag) =
                inner_solve(&f, &h, &b, &mut qn, &state, &[1.0, 2.0, 0.3], &DualEstimate::ones(&b), 1000.0 * mu, &opts).unwrap();
            assert_eq!(out.exit, InnerExit::Tolerance, "{variant:?} mu={mu} {out:?}");
            let oracle = grid_argmin(|x| x - mu * x.ln(), 1e-4, 2.0, 2_000_000);
            for xi in &out.x {
                assert!((xi - mu).abs() < 1e-6, "{variant:?} mu={mu}: {xi}");
                assert!((xi - oracle).abs() < 2e-6);
            }
            assert_eq!(diag.total_violations(), 0);
        }
    }
}

#[test]
fn outer_loop_limit_of_barrier_path() {
    let f = quad(1, 2.0);
    let b = BoundBox::nonnegative(1);
    // the barrier path x(mu) solves x - 2 - mu / x = 0 and tends to 2
    let path = |mu: f64| bisect(|x| x - 2.0 - mu / x, 1e-12, 10.0);
    assert!((path(1e-8) - 2.0).abs() < 1e-8);
    for opts in [IpmOptions::ripm(), IpmOptions::ripmdh()] {
        let qn = QuasiNewtonOp::lsr1(1, 5);
        let r = ipm_solve(&f, &Regularizer::zero(), &b, &[1.0], qn, &opts).unwrap();
        assert_eq!(r.termination, Termination::Converged, "{}", r.solver);
        assert!((r.x[0] - 2.0).abs() <= 1e-3, "{}: {}", r.solver, r.x[0]);
        assert_eq!(r.diagnostics.total_violations(), 0);
    }
}

#[test]
fn two_sided_bounds() {
    let f = quad(2, 3.0);
    let b = BoundBox::new(vec![-1.0, 0.0], vec![1.0, 5.0]).unwrap();
    let r = ipm_solve(&f, &Regularizer::zero(), &b, &[0.0, 1.0], QuasiNewtonOp::lbfgs(2, 5), &IpmOptions::ripmdh()).unwrap();
    assert_eq!(r.termination, Termination::Converged);
    assert_eq!(r.x[0], 1.0);
    assert!((r.x[1] - 3.0).abs() < 1e-3);
    let zu = r.z_upper.as_ref().unwrap();
    assert!((zu[0] - 2.0).abs() < 1e-2, "{zu:?}");
}

fn random_problem() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, f64, u8)> {
    (1usize..6).prop_flat_map(|n| {
        (
            proptest::collection::vec(-3.0..3.0f64, n),
            proptest::collection::vec(0.5..4.0f64, n),
            0.0..1.0f64,
            0u8..3,
        )
    })
}

fn weighted(c: Vec<f64>, w: Vec<f64>) -> impl SmoothObjective<f64> {
    let n = c.len();
    let (c2, w2) = (c.clone(), w.clone());
    FnObjective::new(
        n,
        move |x: &[f64]| x.iter().zip(&c).zip(&w).map(|((v, c), w)| 0.5 * w * (v - c) * (v - c)).sum(),
        move |x: &[f64], g: &mut [f64]| {
            for i in 0..x.len() {
                g[i] = w2[i] * (x[i] - c2[i]);
            }
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn ipm_runs_keep_every_invariant((c, w, lambda, kind) in random_problem()) {
        let n = c.len();
        let h = match kind {
            0 => Regularizer::l1(lambda),
            1 => Regularizer::l0(lambda),
            _ => Regularizer::zero(),
        };
        let f = weighted(c, w);
        let b = BoundBox::nonnegative(n);
        for opts in [IpmOptions::ripm(), IpmOptions::ripmdh(), IpmOptions::ripmdh().with_p_preset()] {
            let r = ipm_solve(&f, &h, &b, &vec![1.0; n], QuasiNewtonOp::lbfgs(n, 5), &opts).unwrap();
            prop_assert_eq!(r.diagnostics.total_violations(), 0, "{:?}", r.diagnostics);
            prop_assert!(b.contains(&r.x));
            let zl = r.z_lower.as_ref().unwrap();
            for i in 0..n {
                prop_assert_eq!(r.x[i] * zl[i], 0.0);
            }
        }
    }

    #[test]
    fn baselines_keep_every_invariant((c, w, lambda, kind) in random_problem()) {
        let n = c.len();
        let h = match kind {
            0 => Regularizer::l1(lambda),
            1 => Regularizer::l0(lambda),
            _ => Regularizer::zero(),
        };
        let f = weighted(c, w);
        let b = BoundBox::nonnegative(n);
        let x0 = vec![1.0; n];
        let o = TrustRegionOptions::default();
        let reports = [
            r2_solve(&f, &h, &b, &x0, &R2Options::default()).unwrap(),
            tr_solve(&f, &h, &b, &x0, QuasiNewtonOp::lsr1(n, 5), &o).unwrap(),
            trdh_solve(&f, &h, &b, &x0, &o).unwrap(),
        ];
        for r in reports {
            prop_assert_eq!(r.diagnostics.total_violations(), 0, "{}: {:?}", r.solver, r.diagnostics);
            prop_assert!(b.contains(&r.x));
            prop_assert!(r.trace.windows(2).all(|p| p[1].1 <= p[0].1 + 1e-12 * p[0].1.abs()));
        }
    }
}
