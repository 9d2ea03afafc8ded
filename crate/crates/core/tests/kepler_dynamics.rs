use oscifour_core::problems::kepler::{
    cartesian_state, energy, ks_init, KeplerConstants, Orbit, SsField, SsFieldWithTime,
};
use oscifour_core::reference::rk_solve;
use oscifour_core::{OscillatoryField, C64};

fn cartesian_rhs(y: &[C64], k: &KeplerConstants) -> Vec<C64> {
    let q = [y[0].re, y[1].re, y[2].re];
    let r2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
    let r = r2.sqrt();
    let eps = k.eps_j2();
    let s2 = q[2] * q[2] / r2;
    let kep = -k.mu / (r2 * r);
    let pref = 1.5 * eps / (r2 * r2 * r);
    let grad = [
        pref * (1.0 - 5.0 * s2) * q[0],
        pref * (1.0 - 5.0 * s2) * q[1],
        pref * (3.0 - 5.0 * s2) * q[2],
    ];
    let mut out = vec![y[3], y[4], y[5]];
    for i in 0..3 {
        out.push(C64::new(kep * q[i] - grad[i], 0.0));
    }
    out
}

#[test]
fn ks_formulation_reproduces_cartesian_motion() {
    let k = KeplerConstants::default();
    let (q0, v0) = Orbit::Eccentric.state();
    let s = ks_init(q0, v0, 0.0, &k).unwrap();
    let field = SsFieldWithTime {
        inner: SsField::new(s.eps_j2, s.omega).unwrap(),
    };
    let mut y0 = s.initial();
    y0.push(C64::new(0.0, 0.0));
    let taus: Vec<f64> = (1..=8).map(|i| i as f64 * 0.25 * s.period()).collect();
    let ks = rk_solve(
        |th, y| field.eval_point(th, y),
        &y0,
        s.omega,
        *taus.last().unwrap(),
        1e-12,
        &taus,
    )
    .unwrap();
    let times: Vec<f64> = ks.states.iter().map(|y| y[8].re).collect();

    let c0: Vec<C64> = q0.iter().chain(&v0).map(|&v| C64::new(v, 0.0)).collect();
    let cart = rk_solve(
        |_th, y| Ok(cartesian_rhs(y, &k)),
        &c0,
        1.0,
        *times.last().unwrap(),
        1e-12,
        &times,
    )
    .unwrap();
    let e0 = energy(&q0, &v0, &k).unwrap();
    for ((tau, y), yc) in taus.iter().zip(&ks.states).zip(&cart.states) {
        let (q, v) = cartesian_state(&y[..8], s.omega, *tau).unwrap();
        let r = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
        let dq = (0..3)
            .map(|i| (q[i] - yc[i].re).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(dq < 1e-7 * r, "tau {tau}: position mismatch {dq}");
        let e = energy(&q, &v, &k).unwrap();
        assert!(
            ((e - e0) / e0).abs() < 1e-10,
            "tau {tau}: energy drift {}",
            (e - e0) / e0
        );
    }
}
