use oscifour_core::problems::nls::NlsProblem;
use oscifour_core::problems::semilinear_field;
use oscifour_core::reference::{rk_solve, rk_solve_field};
use oscifour_core::tfcore::{tf_eval, tf_eval_x, tf_solve};
use oscifour_core::{TfConfig, TruncSeries, C64};

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[test]
fn identity_map_gives_tf_eval() {
    let p = NlsProblem::new(4, 0.5).unwrap();
    let cfg = TfConfig::new(16, 3, 1.0, p.dim()).unwrap();
    let c = tf_solve(&p, &p.initial(), &cfg).unwrap();
    for t in [0.0, 0.07, 0.3] {
        assert_eq!(tf_eval_x(|_, v: &[C64]| v.to_vec(), &c, t), tf_eval(&c, t));
    }
}

#[test]
fn without_nonlinearity_the_linear_flow_is_reproduced() {
    let p = NlsProblem::new(4, 1.0).unwrap();
    let free = semilinear_field(
        p.dim(),
        |th, y: &[TruncSeries]| p.exp_action(th, y).unwrap(),
        |x: &[TruncSeries]| Ok(x.iter().map(|v| TruncSeries::zero(v.degree())).collect()),
    );
    let cfg = TfConfig::new(8, 4, 1.0, p.dim()).unwrap();
    let y0 = p.initial();
    let c = tf_solve(&free, &y0, &cfg).unwrap();
    for t in [0.0, 0.4, 2.5] {
        let x = tf_eval_x(|th, v: &[C64]| p.exp_action_vec(th, v), &c, t);
        assert!(max_diff(&x, &p.exp_action_vec(t, &y0)) < 1e-14);
    }
}

#[test]
fn small_grid_matches_the_untransformed_integration() {
    let p = NlsProblem::new(4, 1.0).unwrap();
    let cfg = TfConfig::new(128, 8, 1.0, p.dim()).unwrap();
    let c = tf_solve(&p, &p.initial(), &cfg).unwrap();
    let times = [0.02, 0.05, 0.1];
    let tol = 1e-12;
    let reference = rk_solve(
        |_, u| Ok(p.untransformed_rhs(u)),
        &p.initial(),
        1.0,
        0.1,
        tol,
        &times,
    )
    .unwrap();
    for (t, u) in times.iter().zip(&reference.states) {
        let x = tf_eval_x(|th, v: &[C64]| p.exp_action_vec(th, v), &c, *t);
        let err = max_diff(&x, u);
        assert!(err < 1e-9, "t = {t}: {err:e}");
    }
}

#[test]
fn tolerance_sweep_converges_monotonically() {
    let p = NlsProblem::new(16, 1.0).unwrap();
    let t_end = 0.3;
    let truth = rk_solve_field(&p, &p.initial(), 1.0, t_end, 1e-12, &[t_end]).unwrap();
    let mut prev = f64::INFINITY;
    for tol in [1e-6, 1e-7, 1e-8, 1e-9, 1e-10] {
        let r = rk_solve_field(&p, &p.initial(), 1.0, t_end, tol, &[t_end]).unwrap();
        let err = max_diff(&r.states[0], &truth.states[0]);
        assert!(err < prev, "tol {tol:e}: {err:e} after {prev:e}");
        prev = err;
    }
}
