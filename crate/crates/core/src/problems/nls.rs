//! Spectral-collocation semi-discretization of the cubic Schrödinger
//! equation `i u_t + u_xx + |u|²u = 0` on `[0, 2π]`.
//!
//! With `2J` grid points `x_n = nπ/J` the grid values satisfy
//! `U' = AU + g(U)` where `A = F⁻¹ diag(λ) F`, `λ_m = -i m²` for `m ≤ J`
//! and `λ_m = -i(2J - m)²` above, and `g(U)_n = i|U_n|²U_n`.
//!
//! Two scalings are supported. The plain problem uses `ω = 1` and initial
//! data `ε·η`. The rescaled problem writes `u(t) = ε v(ε²t)`, so `v` solves
//! `v' = ε⁻² A v + g(v)` with `v(0) = η`: the solver then runs with
//! `ω = ε⁻²` and time `τ = ε²t`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::check_dim;
use crate::fourier::Fft;
use crate::math::cis;
use crate::tfcore::OscillatoryField;
use crate::tps::TruncSeries;
use crate::{Error, Result, C64};

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone)]
pub struct NlsProblem {
    j: usize,
    epsilon: f64,
    rescaled: bool,
    lambda: Vec<C64>,
    fft: Fft,
}

impl NlsProblem {
    /// Plain problem: `ω = 1`, initial data `ε·η`.
    pub fn new(j: usize, epsilon: f64) -> Result<Self> {
        Self::build(j, epsilon, false)
    }

    /// Rescaled problem: `ω = ε⁻²`, initial data `η`.
    pub fn rescaled(j: usize, epsilon: f64) -> Result<Self> {
        Self::build(j, epsilon, true)
    }

    fn build(j: usize, epsilon: f64, rescaled: bool) -> Result<Self> {
        if j < 2 {
            return Err(Error::InvalidConfig(format!(
                "NLS grid needs J >= 2, got {j}"
            )));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "NLS amplitude epsilon must be positive, got {epsilon}"
            )));
        }
        let n = 2 * j;
        let lambda = (0..n)
            .map(|m| {
                let w = if m <= j { m } else { n - m } as f64;
                C64::new(0.0, -w * w)
            })
            .collect();
        Ok(Self {
            j,
            epsilon,
            rescaled,
            lambda,
            fft: Fft::new(n)?,
        })
    }

    #[inline]
    pub fn j(&self) -> usize {
        self.j
    }

    /// Number of grid points `2J`.
    #[inline]
    pub fn dim(&self) -> usize {
        2 * self.j
    }

    #[inline]
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    #[inline]
    pub fn is_rescaled(&self) -> bool {
        self.rescaled
    }

    /// Base frequency of the solve.
    pub fn omega(&self) -> f64 {
        if self.rescaled {
            1.0 / (self.epsilon * self.epsilon)
        } else {
            1.0
        }
    }

    /// Eigenvalues of `A` in DFT order.
    pub fn lambda(&self) -> &[C64] {
        &self.lambda
    }

    /// Grid points `x_n = nπ/J`.
    pub fn grid(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|n| n as f64 * PI / self.j as f64)
            .collect()
    }

    /// Step function: -1 on `[0, π)`, +1 on `[π, 2π]`.
    pub fn step(x: f64) -> f64 {
        if x < PI {
            -1.0
        } else {
            1.0
        }
    }

    /// Initial vector of the solve: `ε·η(x_n)` (plain) or `η(x_n)` (rescaled).
    pub fn initial(&self) -> Vec<C64> {
        let amp = if self.rescaled { 1.0 } else { self.epsilon };
        (0..self.dim())
            .map(|n| {
                // Compare indices rather than floats so x_{J} = π is exact.
                let s = if n < self.j { -1.0 } else { 1.0 };
                C64::new(amp * s, 0.0)
            })
            .collect()
    }

    /// Factor converting solver variables to `u`: `ε` when rescaled, else 1.
    pub fn amplitude_scale(&self) -> f64 {
        if self.rescaled {
            self.epsilon
        } else {
            1.0
        }
    }

    /// Solver time corresponding to physical time `t`.
    pub fn solver_time(&self, t: f64) -> f64 {
        if self.rescaled {
            t * self.epsilon * self.epsilon
        } else {
            t
        }
    }

    fn apply_exp_slice(&self, theta: f64, buf: &mut [C64]) {
        self.fft.forward(buf);
        let inv = 1.0 / buf.len() as f64;
        for (v, l) in buf.iter_mut().zip(&self.lambda) {
            *v *= cis(l.im * theta) * inv;
        }
        self.fft.inverse_unnormalized(buf);
    }

    /// `e^{θA} v` for a plain vector.
    pub fn exp_action_vec(&self, theta: f64, v: &[C64]) -> Vec<C64> {
        let mut buf = v.to_vec();
        self.apply_exp_slice(theta, &mut buf);
        buf
    }

    /// `e^{θA} W` applied to every Taylor slice of a jet vector.
    pub fn exp_action(&self, theta: f64, w: &[TruncSeries]) -> Result<Vec<TruncSeries>> {
        check_dim(self.dim(), w.len())?;
        let deg = w[0].degree();
        let mut out: Vec<TruncSeries> = (0..w.len()).map(|_| TruncSeries::zero(deg)).collect();
        let mut buf = vec![C64::new(0.0, 0.0); w.len()];
        for j in 0..=deg {
            for (b, s) in buf.iter_mut().zip(w) {
                *b = s.coeffs()[j];
            }
            self.apply_exp_slice(theta, &mut buf);
            for (o, b) in out.iter_mut().zip(&buf) {
                o.coeffs_mut()[j] = *b;
            }
        }
        Ok(out)
    }

    /// Pointwise nonlinearity `i|U|²U`.
    pub fn g_vec(u: &[C64]) -> Vec<C64> {
        u.iter().map(|v| I * v.norm_sqr() * v).collect()
    }

    /// Jet nonlinearity `i·U·conj(U)·U`, componentwise.
    pub fn g(u: &[TruncSeries]) -> Result<Vec<TruncSeries>> {
        u.iter()
            .map(|s| Ok(s.mul(&s.conj())?.mul(s)?.scale(I)))
            .collect()
    }

    /// Right-hand side of the grid system `U' = ωAU + g(U)`.
    pub fn untransformed_rhs(&self, u: &[C64]) -> Vec<C64> {
        let omega = self.omega();
        let mut lin = u.to_vec();
        self.fft.forward(&mut lin);
        let inv = 1.0 / lin.len() as f64;
        for (v, l) in lin.iter_mut().zip(&self.lambda) {
            *v *= l * omega * inv;
        }
        self.fft.inverse_unnormalized(&mut lin);
        lin.iter().zip(Self::g_vec(u)).map(|(a, b)| a + b).collect()
    }
}

impl OscillatoryField for NlsProblem {
    fn dim(&self) -> usize {
        2 * self.j
    }

    fn eval_jet(&self, theta: f64, y: &[TruncSeries]) -> Result<Vec<TruncSeries>> {
        check_dim(self.dim(), y.len())?;
        let deg = y[0].degree();
        let n = self.dim();
        // Slice-major buffers so each transform works on contiguous data.
        let mut slices = vec![C64::new(0.0, 0.0); n * (deg + 1)];
        for (c, s) in y.iter().enumerate() {
            if s.degree() != deg {
                return Err(Error::DegreeMismatch {
                    left: deg,
                    right: s.degree(),
                });
            }
            for (j, v) in s.coeffs().iter().enumerate() {
                slices[j * n + c] = *v;
            }
        }
        for chunk in slices.chunks_mut(n) {
            self.apply_exp_slice(theta, chunk);
        }
        // Cubic term per grid point: i·U·conj(U)·U truncated to `deg`.
        let mut cubed = vec![C64::new(0.0, 0.0); n * (deg + 1)];
        let mut sq = vec![C64::new(0.0, 0.0); deg + 1];
        for c in 0..n {
            for k in 0..=deg {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..=k {
                    acc += slices[i * n + c] * slices[(k - i) * n + c].conj();
                }
                sq[k] = acc;
            }
            for k in 0..=deg {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..=k {
                    acc += sq[i] * slices[(k - i) * n + c];
                }
                cubed[k * n + c] = I * acc;
            }
        }
        for chunk in cubed.chunks_mut(n) {
            self.apply_exp_slice(-theta, chunk);
        }
        Ok((0..n)
            .map(|c| {
                TruncSeries::new((0..=deg).map(|j| cubed[j * n + c]).collect())
                    .expect("at least one coefficient")
            })
            .collect())
    }

    fn eval_point(&self, theta: f64, y: &[C64]) -> Result<Vec<C64>> {
        check_dim(self.dim(), y.len())?;
        let x = self.exp_action_vec(theta, y);
        Ok(self.exp_action_vec(-theta, &Self::g_vec(&x)))
    }
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_vec(rng: &mut impl Rng, n: usize) -> Vec<C64> {
        (0..n)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    /// Dense `A = F⁻¹ diag(λ) F`.
    fn dense_a(p: &NlsProblem) -> Vec<C64> {
        let n = p.dim();
        let mut a = vec![c(0.0, 0.0); n * n];
        for r in 0..n {
            for s in 0..n {
                let mut acc = c(0.0, 0.0);
                for m in 0..n {
                    let phase = 2.0 * PI * (m * (r + n - s)) as f64 / n as f64;
                    acc += p.lambda()[m] * cis(phase);
                }
                a[r * n + s] = acc / n as f64;
            }
        }
        a
    }

    #[test]
    fn eigenvalues_and_grid() {
        let p = NlsProblem::new(2, 1.0).unwrap();
        assert_eq!(
            p.lambda(),
            &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, -4.0), c(0.0, -1.0)]
        );
        let p = NlsProblem::new(4, 1.0).unwrap();
        let im: Vec<f64> = p.lambda().iter().map(|l| l.im).collect();
        assert_eq!(im, [0.0, -1.0, -4.0, -9.0, -16.0, -9.0, -4.0, -1.0]);
        assert!(NlsProblem::new(1, 1.0).is_err());
        assert!(NlsProblem::new(4, 0.0).is_err());
        assert_eq!(NlsProblem::new(512, 1.0).unwrap().dim(), 1024);
    }

    #[test]
    fn initial_data_is_the_step_function() {
        let p = NlsProblem::new(8, 0.5).unwrap();
        let y0 = p.initial();
        let grid = p.grid();
        assert_eq!(y0[0], c(-0.5, 0.0));
        assert_eq!(grid[8], PI);
        assert_eq!(y0[8], c(0.5, 0.0));
        for (x, v) in grid.iter().zip(&y0) {
            assert_eq!(v.re, 0.5 * NlsProblem::step(*x));
        }
        let r = NlsProblem::rescaled(8, 0.5).unwrap();
        assert_eq!(r.initial()[0], c(-1.0, 0.0));
        assert_eq!(r.omega(), 4.0);
        assert_eq!(r.amplitude_scale(), 0.5);
        assert_eq!(r.solver_time(8.0), 2.0);
    }

    #[test]
    fn exp_action_identity_and_semigroup() {
        let p = NlsProblem::new(8, 1.0).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(8);
        let v = random_vec(&mut rng, 16);
        let same = p.exp_action_vec(0.0, &v);
        for (a, b) in same.iter().zip(&v) {
            assert!((a - b).norm() < 1e-15);
        }
        let (t1, t2) = (0.37, -1.21);
        let two = p.exp_action_vec(t2, &p.exp_action_vec(t1, &v));
        let one = p.exp_action_vec(t1 + t2, &v);
        for (a, b) in two.iter().zip(&one) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn exp_action_matches_dense_expm() {
        let p = NlsProblem::new(2, 1.0).unwrap();
        let a = dense_a(&p);
        let mut rng = rand::rngs::StdRng::seed_from_u64(9);
        for theta in [0.3, 1.7, -2.2] {
            let e = expm(&a.iter().map(|v| v * theta).collect::<Vec<_>>(), 4);
            let jets = random_jets(&mut rng, 4, 2);
            let got = p.exp_action(theta, &jets).unwrap();
            let expected = super::super::apply_matrix(&e, &jets);
            for (g, x) in got.iter().zip(&expected) {
                for (u, v) in g.coeffs().iter().zip(x.coeffs()) {
                    assert!((u - v).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn exp_action_preserves_norm() {
        let p = NlsProblem::new(16, 1.0).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(10);
        let v = random_vec(&mut rng, 32);
        let n0: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let n1: f64 = p.exp_action_vec(2.9, &v).iter().map(|z| z.norm_sqr()).sum();
        assert!((n0 - n1).abs() < 1e-12 * n0);
    }

    #[test]
    fn nonlinearity_examples() {
        let u = vec![
            TruncSeries::constant(c(1.0, 0.0), 2),
            TruncSeries::constant(c(1.0, 2.0), 2),
        ];
        let g = NlsProblem::g(&u).unwrap();
        assert_eq!(g[0].coeffs()[0], c(0.0, 1.0));
        assert!((g[1].coeffs()[0] - c(0.0, 5.0) * c(1.0, 2.0)).norm() < 1e-15);
        assert!(g[1].coeffs()[1..].iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn nonlinearity_matches_sampling_oracle() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let jets = random_jets(&mut rng, 3, 4);
        let g = NlsProblem::g(&jets).unwrap();
        for (jet, gj) in jets.iter().zip(&g) {
            let fit = sampled_taylor(
                |t| {
                    let v = jet.eval(t);
                    c(0.0, 1.0) * v.norm_sqr() * v
                },
                12,
                1.0,
            );
            // The composition is a polynomial of degree 12, so the fit is exact.
            for (a, b) in fit.iter().zip(gj.coeffs()) {
                assert!((a - b).norm() < 1e-8, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn field_jet_derivative_matches_finite_difference() {
        let p = NlsProblem::new(4, 1.0).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(12);
        let y = random_vec(&mut rng, 8);
        let dir = random_vec(&mut rng, 8);
        let theta = 0.9;
        let jets: Vec<TruncSeries> = y
            .iter()
            .zip(&dir)
            .map(|(a, b)| TruncSeries::linear(*a, *b, 1))
            .collect();
        let out = p.eval_jet(theta, &jets).unwrap();
        let h = 1e-6;
        let plus: Vec<C64> = y.iter().zip(&dir).map(|(a, b)| a + b * h).collect();
        let minus: Vec<C64> = y.iter().zip(&dir).map(|(a, b)| a - b * h).collect();
        let fp = p.eval_point(theta, &plus).unwrap();
        let fm = p.eval_point(theta, &minus).unwrap();
        let f0 = p.eval_point(theta, &y).unwrap();
        for i in 0..8 {
            let fd = (fp[i] - fm[i]) / (2.0 * h);
            assert!((out[i].coeffs()[1] - fd).norm() < 1e-6 * (1.0 + fd.norm()));
            assert!((out[i].coeffs()[0] - f0[i]).norm() < 1e-13);
        }
    }

    #[test]
    fn field_agrees_with_generic_semilinear_form() {
        let p = NlsProblem::new(4, 1.0).unwrap();
        let generic = super::super::semilinear_field(
            8,
            |t, w: &[TruncSeries]| p.exp_action(t, w).unwrap(),
            NlsProblem::g,
        );
        let mut rng = rand::rngs::StdRng::seed_from_u64(13);
        let jets = random_jets(&mut rng, 8, 3);
        let a = p.eval_jet(2.3, &jets).unwrap();
        let b = generic.eval_jet(2.3, &jets).unwrap();
        for (x, y) in a.iter().zip(&b) {
            for (u, v) in x.coeffs().iter().zip(y.coeffs()) {
                assert!((u - v).norm() < 1e-13);
            }
        }
    }
}
