//! The Kepler problem perturbed by the Earth's J2 zonal harmonic, regularized
//! with the Kustaanheimo-Stiefel (KS) map and written in the
//! Stiefel-Scheifele variation-of-parameters form.
//!
//! Positions are in km, velocities in km/s, physical time in s. The fictitious
//! time `τ` satisfies `dt/dτ = ‖q‖`. With `ω = sqrt(h/2)` the KS coordinates are
//! `u(τ) = cos(ωτ) α(τ) + ω⁻¹ sin(ωτ) β(τ)` and the solver works on the
//! eight components `(α, β)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::check_dim;
use crate::math::{cos, sin, sqrt};
use crate::tfcore::{
    quadrature_step, tf_eval, ModeTensor, OscillatoryField, TfCoefficients, TfConfig,
};
use crate::tps::TruncSeries;
use crate::{Error, Result, C64};

/// Zonal harmonic coefficient `J2`.
pub const J2: f64 = 1.08262668e-3;
/// Earth's gravitational parameter `μ` (km³/s²).
pub const MU: f64 = 398600.44189;
/// Earth's equatorial radius (km).
pub const RE: f64 = 6378.137;

/// Physical constants of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeplerConstants {
    pub mu: f64,
    pub j2: f64,
    pub re: f64,
}

impl Default for KeplerConstants {
    fn default() -> Self {
        Self {
            mu: MU,
            j2: J2,
            re: RE,
        }
    }
}

impl KeplerConstants {
    /// Same constants with a different `J2` (0 gives the pure Kepler problem).
    pub fn with_j2(j2: f64) -> Self {
        Self {
            j2,
            ..Self::default()
        }
    }

    /// Perturbation strength `J2·μ·Re²` (km⁵/s²).
    pub fn eps_j2(&self) -> f64 {
        self.j2 * self.mu * self.re * self.re
    }
}

/// Named initial states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orbit {
    Geostationary,
    Eccentric,
}

impl Orbit {
    /// `(q0, q̇0)` in km and km/s.
    pub fn state(self) -> ([f64; 3], [f64; 3]) {
        match self {
            Orbit::Geostationary => (
                [42149.1336, 0.0, 0.0],
                [0.0, 3.075823259987749, 0.0010736649055318406],
            ),
            Orbit::Eccentric => (
                [11959.886901183693, -16289.448826603336, -5963.757695165331],
                [4.724300951633136, -1.1099935305609756, -0.3847854410416176],
            ),
        }
    }
}

/// KS initial data and the derived constants of motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeplerState {
    pub q: [f64; 3],
    pub qdot: [f64; 3],
    pub u: [f64; 4],
    pub uprime: [f64; 4],
    /// `h = μ/r0 - |q̇0|²/2 - V(q0)`, minus the total energy.
    pub h: f64,
    pub omega: f64,
    pub t0: f64,
    pub eps_j2: f64,
}

impl KeplerState {
    /// Initial vector `(α, β) = (u0, u'0)` of the solve.
    pub fn initial(&self) -> Vec<C64> {
        self.u
            .iter()
            .chain(&self.uprime)
            .map(|&v| C64::new(v, 0.0))
            .collect()
    }

    /// One revolution in fictitious time, `2π/ω`.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    pub fn field(&self) -> SsField {
        SsField::new(self.eps_j2, self.omega).expect("omega > 0 by construction")
    }
}

/// `L(u)` as rows.
pub fn ks_matrix(u: &[f64; 4]) -> [[f64; 4]; 3] {
    let [u1, u2, u3, u4] = *u;
    [[u1, -u2, -u3, u4], [u2, u1, -u4, -u3], [u3, u4, u1, u2]]
}

fn norm3(v: &[f64; 3]) -> f64 {
    sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
}

/// The KS map `q = L(u)u`.
pub fn ks_position(u: &[f64; 4]) -> [f64; 3] {
    let [u1, u2, u3, u4] = *u;
    [
        u1 * u1 - u2 * u2 - u3 * u3 + u4 * u4,
        2.0 * (u1 * u2 - u3 * u4),
        2.0 * (u1 * u3 + u2 * u4),
    ]
}

/// The KS map on jets.
pub fn ks_position_jet(u: &[TruncSeries]) -> Result<[TruncSeries; 3]> {
    check_dim(4, u.len())?;
    let sq = |a: &TruncSeries| a.mul(a);
    let x = sq(&u[0])?
        .sub(&sq(&u[1])?)?
        .sub(&sq(&u[2])?)?
        .add(&sq(&u[3])?)?;
    let y = u[0].mul(&u[1])?.sub(&u[2].mul(&u[3])?)?.scale_real(2.0);
    let z = u[0].mul(&u[2])?.add(&u[1].mul(&u[3])?)?.scale_real(2.0);
    Ok([x, y, z])
}

/// J2 potential `V(q) = ε/(2r³)(3 sin²φ - 1)` with `sin φ = z/r`.
pub fn potential(q: &[f64; 3], eps_j2: f64) -> Result<f64> {
    let r = norm3(q);
    if r == 0.0 {
        return Err(Error::SingularPosition);
    }
    let s = q[2] / r;
    Ok(eps_j2 / (2.0 * r * r * r) * (3.0 * s * s - 1.0))
}

/// Total energy `E = |q̇|²/2 - μ/r + V(q)`.
pub fn energy(q: &[f64; 3], qdot: &[f64; 3], constants: &KeplerConstants) -> Result<f64> {
    let r = norm3(q);
    if r == 0.0 {
        return Err(Error::SingularPosition);
    }
    let v2 = qdot[0] * qdot[0] + qdot[1] * qdot[1] + qdot[2] * qdot[2];
    Ok(0.5 * v2 - constants.mu / r + potential(q, constants.eps_j2())?)
}

/// KS initialization from a Cartesian state.
pub fn ks_init(
    q0: [f64; 3],
    qdot0: [f64; 3],
    t0: f64,
    constants: &KeplerConstants,
) -> Result<KeplerState> {
    let r0 = norm3(&q0);
    if r0 <= 0.0 || !r0.is_finite() {
        return Err(Error::SingularPosition);
    }
    let [x0, y0, z0] = q0;
    let u = if x0 >= 0.0 {
        let a = 0.5 * sqrt(r0 + x0);
        let d = r0 + x0;
        [a, (y0 * a + z0 * a) / d, (z0 * a - y0 * a) / d, a]
    } else {
        let b = 0.5 * sqrt(r0 - x0);
        let d = r0 - x0;
        [(y0 * b + z0 * b) / d, b, b, (z0 * b - y0 * b) / d]
    };
    let l = ks_matrix(&u);
    let mut uprime = [0.0; 4];
    for (i, up) in uprime.iter_mut().enumerate() {
        *up = 0.5 * (0..3).map(|r| l[r][i] * qdot0[r]).sum::<f64>();
    }
    let h = -energy(&q0, &qdot0, constants)?;
    if h.is_nan() || h <= 0.0 {
        return Err(Error::UnsupportedOrbit { h });
    }
    Ok(KeplerState {
        q: q0,
        qdot: qdot0,
        u,
        uprime,
        h,
        omega: sqrt(h / 2.0),
        t0,
        eps_j2: constants.eps_j2(),
    })
}

/// `R(u) = ε/(4‖u‖⁴)(3 sin²φ - 1)`, `sin φ = 2(u1u3 + u2u4)/‖u‖²`.
pub fn r_potential(u: &[f64; 4], eps_j2: f64) -> f64 {
    let n2: f64 = u.iter().map(|v| v * v).sum();
    let s = 2.0 * (u[0] * u[2] + u[1] * u[3]) / n2;
    eps_j2 / (4.0 * n2 * n2) * (3.0 * s * s - 1.0)
}

/// `∇R(u) = ε‖u‖⁻⁶ [(1 - 6 sin²φ) u + 3 sin φ (u3, u4, u1, u2)]` on jets.
///
/// Uses only products and one reciprocal. Fails with
/// [`Error::SingularJet`] when `‖u‖²` has a vanishing constant term.
pub fn grad_r(u: &[TruncSeries], eps_j2: f64) -> Result<Vec<TruncSeries>> {
    check_dim(4, u.len())?;
    let mut n2 = u[0].mul(&u[0])?;
    for v in &u[1..] {
        n2 = n2.add(&v.mul(v)?)?;
    }
    let inv = n2.recip()?;
    let s = u[0]
        .mul(&u[2])?
        .add(&u[1].mul(&u[3])?)?
        .mul(&inv)?
        .scale_real(2.0);
    let inv3 = inv.mul(&inv)?.mul(&inv)?.scale_real(eps_j2);
    let mut radial = s.mul(&s)?.scale_real(-6.0);
    radial.coeffs_mut()[0] += 1.0;
    let a = radial.mul(&inv3)?;
    let b = s.mul(&inv3)?.scale_real(3.0);
    let swap = [2, 3, 0, 1];
    (0..4)
        .map(|i| a.mul(&u[i])?.add(&b.mul(&u[swap[i]])?))
        .collect()
}

/// Pointwise `∇R(u)`.
pub fn grad_r_point(u: &[f64; 4], eps_j2: f64) -> [f64; 4] {
    let n2: f64 = u.iter().map(|v| v * v).sum();
    let s = 2.0 * (u[0] * u[2] + u[1] * u[3]) / n2;
    let a = eps_j2 / (n2 * n2 * n2) * (1.0 - 6.0 * s * s);
    let b = 3.0 * eps_j2 / (n2 * n2 * n2) * s;
    [
        a * u[0] + b * u[2],
        a * u[1] + b * u[3],
        a * u[2] + b * u[0],
        a * u[3] + b * u[1],
    ]
}

/// The field of `(α, β)`:
/// `α' = ω⁻¹ sin θ ∇P(u)`, `β' = -cos θ ∇P(u)` with
/// `u = cos θ α + ω⁻¹ sin θ β`.
///
/// The KS equation of motion is `u'' = -(h/2) u - ∇P(u)` with
/// `P(u) = ‖u‖² V(L(u)u) / 4`, which is [`r_potential`] at half strength:
/// `∇P = ∇R / 2`. The factor follows from the Hamiltonian
/// `K = |p|²/8 - μ + ‖u‖²(V - E)` with `p = 4u'`, and is checked against a
/// direct Cartesian integration in the crate's tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsField {
    eps_j2: f64,
    omega: f64,
}

impl SsField {
    pub fn new(eps_j2: f64, omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "Kepler omega must be positive, got {omega}"
            )));
        }
        Ok(Self { eps_j2, omega })
    }

    #[inline]
    pub fn eps_j2(&self) -> f64 {
        self.eps_j2
    }

    #[inline]
    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Strength passed to [`grad_r`]: half of `eps_j2`, see the type docs.
    #[inline]
    fn grad_strength(&self) -> f64 {
        0.5 * self.eps_j2
    }
}

impl OscillatoryField for SsField {
    fn dim(&self) -> usize {
        8
    }

    fn is_real(&self) -> bool {
        true
    }

    fn eval_jet(&self, theta: f64, y: &[TruncSeries]) -> Result<Vec<TruncSeries>> {
        check_dim(8, y.len())?;
        let (c, s) = (cos(theta), sin(theta) / self.omega);
        let deg = y[0].degree();
        if self.eps_j2 == 0.0 {
            return Ok(vec![TruncSeries::zero(deg); 8]);
        }
        let u = (0..4)
            .map(|i| y[i].scale_real(c).add(&y[4 + i].scale_real(s)))
            .collect::<Result<Vec<_>>>()?;
        let g = grad_r(&u, self.grad_strength())?;
        let mut out: Vec<TruncSeries> = g.iter().map(|v| v.scale_real(s)).collect();
        out.extend(g.iter().map(|v| v.scale_real(-c)));
        Ok(out)
    }

    fn eval_point(&self, theta: f64, y: &[C64]) -> Result<Vec<C64>> {
        check_dim(8, y.len())?;
        let (c, s) = (cos(theta), sin(theta) / self.omega);
        let u = [0, 1, 2, 3].map(|i| c * y[i].re + s * y[4 + i].re);
        if u.iter().all(|v| *v == 0.0) {
            return Err(Error::SingularJet);
        }
        let g = grad_r_point(&u, self.grad_strength());
        let mut out: Vec<C64> = g.iter().map(|v| C64::new(s * v, 0.0)).collect();
        out.extend(g.iter().map(|v| C64::new(-c * v, 0.0)));
        Ok(out)
    }
}

/// KS coordinates `u` and `u'` from `(α, β)` at fictitious time `τ`.
pub fn ks_coordinates(y: &[C64], omega: f64, tau: f64) -> ([f64; 4], [f64; 4]) {
    let th = omega * tau;
    let (c, s) = (cos(th), sin(th));
    let mut u = [0.0; 4];
    let mut up = [0.0; 4];
    for i in 0..4 {
        let (a, b) = (y[i].re, y[4 + i].re);
        u[i] = c * a + s / omega * b;
        up[i] = -omega * s * a + c * b;
    }
    (u, up)
}

/// Cartesian position and velocity from `(α, β)` at fictitious time `τ`,
/// using `q = L(u)u` and `q̇ = 2L(u)u'/‖u‖²`.
pub fn cartesian_state(y: &[C64], omega: f64, tau: f64) -> Result<([f64; 3], [f64; 3])> {
    let (u, up) = ks_coordinates(y, omega, tau);
    let n2: f64 = u.iter().map(|v| v * v).sum();
    if n2 == 0.0 {
        return Err(Error::SingularPosition);
    }
    let l = ks_matrix(&u);
    let mut qdot = [0.0; 3];
    for (r, v) in qdot.iter_mut().enumerate() {
        *v = 2.0 * (0..4).map(|i| l[r][i] * up[i]).sum::<f64>() / n2;
    }
    Ok((ks_position(&u), qdot))
}

/// The physical time `t(τ) = t0 + ∫₀^τ ‖u(σ)‖² dσ` as a scalar Taylor-Fourier
/// expansion built from `(α, β)` coefficients.
///
/// `‖u‖²` is a trigonometric polynomial of bandwidth `2M + 2` in `θ` (the
/// `cos θ`, `sin θ` factors add one to each factor's bandwidth), so it is
/// interpolated on a grid with more than `2M + 2` modes and integrated exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalTime {
    coefficients: TfCoefficients,
}

impl PhysicalTime {
    pub fn new(c: &TfCoefficients, t0: f64) -> Result<Self> {
        let cfg = c.config();
        check_dim(8, cfg.dim)?;
        let omega = cfg.omega;
        let deg = c.degree().min(cfg.degree + 1);
        let grid_modes = (2 * cfg.modes + 3).next_power_of_two();
        let nodes = c.node_values(grid_modes, deg)?;
        let prod_deg = 2 * deg;
        let n_nodes = 2 * grid_modes;
        let mut integrand = crate::tfcore::NodeValues::zeros(1, prod_deg, grid_modes);
        for n in 0..n_nodes {
            let th = crate::fourier::node_angle(n, grid_modes);
            let (cs, sn) = (cos(th), sin(th) / omega);
            let mut sq = vec![C64::new(0.0, 0.0); prod_deg + 1];
            let mut u = vec![C64::new(0.0, 0.0); deg + 1];
            for comp in 0..4 {
                for (j, v) in u.iter_mut().enumerate() {
                    *v = nodes.get(comp, j, n) * cs + nodes.get(4 + comp, j, n) * sn;
                }
                for a in 0..=deg {
                    for b in 0..=deg {
                        sq[a + b] += u[a] * u[b];
                    }
                }
            }
            for (j, v) in sq.iter().enumerate() {
                integrand.set(0, j, n, *v);
            }
        }
        let z: ModeTensor = integrand.to_modes(false)?;
        let tcfg = TfConfig::new(grid_modes, prod_deg.max(1), omega, 1)?;
        let coefficients = quadrature_step(&z, &[C64::new(t0, 0.0)], &tcfg)?;
        Ok(Self { coefficients })
    }

    pub fn coefficients(&self) -> &TfCoefficients {
        &self.coefficients
    }

    pub fn eval(&self, tau: f64) -> f64 {
        tf_eval(&self.coefficients, tau)[0].re
    }
}

/// Convenience wrapper: builds [`PhysicalTime`] and evaluates it once.
pub fn physical_time(c: &TfCoefficients, tau: f64, t0: f64) -> Result<f64> {
    Ok(PhysicalTime::new(c, t0)?.eval(tau))
}

/// Field for `(α, β, t)`: the eight-component system plus `t' = ‖u‖²`.
/// Used to integrate the physical time with the reference integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsFieldWithTime {
    pub inner: SsField,
}

impl OscillatoryField for SsFieldWithTime {
    fn dim(&self) -> usize {
        9
    }

    fn is_real(&self) -> bool {
        true
    }

    fn eval_jet(&self, theta: f64, y: &[TruncSeries]) -> Result<Vec<TruncSeries>> {
        check_dim(9, y.len())?;
        let mut out = self.inner.eval_jet(theta, &y[..8])?;
        let (c, s) = (cos(theta), sin(theta) / self.inner.omega());
        let mut n2 = TruncSeries::zero(y[0].degree());
        for i in 0..4 {
            let u = y[i].scale_real(c).add(&y[4 + i].scale_real(s))?;
            n2 = n2.add(&u.mul(&u)?)?;
        }
        out.push(n2);
        Ok(out)
    }

    fn eval_point(&self, theta: f64, y: &[C64]) -> Result<Vec<C64>> {
        check_dim(9, y.len())?;
        let mut out = self.inner.eval_point(theta, &y[..8])?;
        let (c, s) = (cos(theta), sin(theta) / self.inner.omega());
        let n2: f64 = (0..4)
            .map(|i| {
                let u = c * y[i].re + s * y[4 + i].re;
                u * u
            })
            .sum();
        out.push(C64::new(n2, 0.0));
        Ok(out)
    }
}
