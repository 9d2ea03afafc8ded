//! Built-in oscillatory fields.
//!
//! - [`LinearTestField`]: `f(θ, y) = a·e^{ik0θ}`, solvable in closed form.
//! - [`SemilinearField`]: `f(θ, y) = e^{-θA} g(e^{θA} y)` from user-supplied
//!   jet maps.
//! - [`nls`]: spectral-collocation cubic Schrödinger equation.
//! - [`kepler`]: the J2-perturbed Kepler problem in Kustaanheimo-Stiefel
//!   variation-of-parameters form.

use alloc::vec::Vec;

use crate::math::cis;
use crate::tfcore::OscillatoryField;
use crate::tps::TruncSeries;
use crate::{Error, Result, C64};

pub mod kepler;
pub mod nls;

/// `f(θ, y) = amplitude·e^{i·mode·θ}`, independent of `y` (dimension 1).
///
/// With `y(0) = y0` the exact solution is `y0 + ∫₀ᵗ f(ωs) ds`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearTestField {
    pub amplitude: C64,
    pub mode: i64,
}

impl LinearTestField {
    pub fn new(amplitude: C64, mode: i64) -> Self {
        Self { amplitude, mode }
    }

    /// Closed-form solution at time `t`.
    pub fn exact(&self, y0: C64, omega: f64, t: f64) -> C64 {
        if self.mode == 0 {
            y0 + self.amplitude * t
        } else {
            let kw = self.mode as f64 * omega;
            y0 + self.amplitude * (cis(kw * t) - 1.0) / C64::new(0.0, kw)
        }
    }
}

impl OscillatoryField for LinearTestField {
    fn dim(&self) -> usize {
        1
    }

    fn eval_jet(&self, theta: f64, y: &[TruncSeries]) -> Result<Vec<TruncSeries>> {
        check_dim(1, y.len())?;
        Ok(alloc::vec![TruncSeries::constant(
            self.amplitude * cis(self.mode as f64 * theta),
            y[0].degree()
        )])
    }
}

/// `f(θ, y) = e^{-θA} g(e^{θA} y)` assembled from the action of `e^{θA}` on
/// jet vectors and a jet-valued nonlinearity `g`.
pub struct SemilinearField<E, G> {
    dim: usize,
    exp_action: E,
    g: G,
}

impl<E, G> SemilinearField<E, G>
where
    E: Fn(f64, &[TruncSeries]) -> Vec<TruncSeries> + Sync,
    G: Fn(&[TruncSeries]) -> Result<Vec<TruncSeries>> + Sync,
{
    pub fn new(dim: usize, exp_action: E, g: G) -> Self {
        Self { dim, exp_action, g }
    }
}

/// Shorthand for [`SemilinearField::new`].
pub fn semilinear_field<E, G>(dim: usize, exp_action: E, g: G) -> SemilinearField<E, G>
where
    E: Fn(f64, &[TruncSeries]) -> Vec<TruncSeries> + Sync,
    G: Fn(&[TruncSeries]) -> Result<Vec<TruncSeries>> + Sync,
{
    SemilinearField::new(dim, exp_action, g)
}

impl<E, G> OscillatoryField for SemilinearField<E, G>
where
    E: Fn(f64, &[TruncSeries]) -> Vec<TruncSeries> + Sync,
    G: Fn(&[TruncSeries]) -> Result<Vec<TruncSeries>> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval_jet(&self, theta: f64, y: &[TruncSeries]) -> Result<Vec<TruncSeries>> {
        check_dim(self.dim, y.len())?;
        let x = (self.exp_action)(theta, y);
        check_dim(self.dim, x.len())?;
        let gx = (self.g)(&x)?;
        check_dim(self.dim, gx.len())?;
        let out = (self.exp_action)(-theta, &gx);
        check_dim(self.dim, out.len())?;
        Ok(out)
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Applies a dense `n×n` row-major matrix to every Taylor slice of a jet vector.
pub fn apply_matrix(matrix: &[C64], y: &[TruncSeries]) -> Vec<TruncSeries> {
    let n = y.len();
    debug_assert_eq!(matrix.len(), n * n);
    let deg = y.first().map_or(0, |s| s.degree());
    (0..n)
        .map(|r| {
            let mut out = TruncSeries::zero(deg);
            for (c, yc) in y.iter().enumerate() {
                let a = matrix[r * n + c];
                for (o, v) in out.coeffs_mut().iter_mut().zip(yc.coeffs()) {
                    *o += a * v;
                }
            }
            out
        })
        .collect()
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;
    use alloc::vec;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn linear_test_exact_solution() {
        let f = LinearTestField::new(c(1.0, 0.0), 1);
        let y = f.exact(c(0.0, 0.0), 1.0, 0.7);
        assert!((y - c(0.0, -1.0) * (cis(0.7) - 1.0)).norm() < 1e-15);
        let drift = LinearTestField::new(c(2.0, 1.0), 0);
        assert_eq!(drift.exact(c(1.0, 0.0), 5.0, 2.0), c(5.0, 2.0));
    }

    #[test]
    fn zero_nonlinearity_gives_zero_field() {
        let field = semilinear_field(
            2,
            |_t, y: &[TruncSeries]| y.to_vec(),
            |y: &[TruncSeries]| Ok(y.iter().map(|s| TruncSeries::zero(s.degree())).collect()),
        );
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let y = random_jets(&mut rng, 2, 3);
        for s in field.eval_jet(0.4, &y).unwrap() {
            assert!(s.coeffs().iter().all(|v| v.norm() == 0.0));
        }
    }

    #[test]
    fn identity_action_gives_g() {
        let g = |y: &[TruncSeries]| -> Result<Vec<TruncSeries>> {
            Ok(vec![y[0].mul(&y[1])?, y[0].mul(&y[0])?])
        };
        let field = semilinear_field(2, |_t, y: &[TruncSeries]| y.to_vec(), g);
        let mut rng = rand::rngs::StdRng::seed_from_u64(4);
        let y = random_jets(&mut rng, 2, 4);
        assert_eq!(field.eval_jet(1.3, &y).unwrap(), g(&y).unwrap());
    }

    #[test]
    fn dense_two_by_two_matches_expm_oracle() {
        let a = [c(0.0, 0.3), c(1.0, 0.0), c(-2.0, 0.5), c(0.1, -0.7)];
        let exp_action = move |theta: f64, y: &[TruncSeries]| {
            let scaled: Vec<C64> = a.iter().map(|v| v * theta).collect();
            apply_matrix(&expm(&scaled, 2), y)
        };
        let g = |y: &[TruncSeries]| -> Result<Vec<TruncSeries>> {
            let sq = y[0].mul(&y[1])?;
            Ok(vec![sq.scale(c(0.0, 1.0)), y[0].mul(&y[0])?.add(&y[1])?])
        };
        let field = semilinear_field(2, exp_action, g);
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for _ in 0..10 {
            let theta = rng.gen_range(0.0..6.3);
            let y: Vec<C64> = (0..2)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let got = field.eval_point(theta, &y).unwrap();
            // Independent pointwise evaluation of e^{-θA} g(e^{θA} y).
            let fwd = expm(&a.iter().map(|v| v * theta).collect::<Vec<_>>(), 2);
            let bwd = expm(&a.iter().map(|v| v * -theta).collect::<Vec<_>>(), 2);
            let x = [fwd[0] * y[0] + fwd[1] * y[1], fwd[2] * y[0] + fwd[3] * y[1]];
            let gx = [c(0.0, 1.0) * x[0] * x[1], x[0] * x[0] + x[1]];
            let expected = [
                bwd[0] * gx[0] + bwd[1] * gx[1],
                bwd[2] * gx[0] + bwd[3] * gx[1],
            ];
            for (g, e) in got.iter().zip(&expected) {
                assert!((g - e).norm() < 1e-12, "{g} vs {e}");
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let field = semilinear_field(
            2,
            |_t, y: &[TruncSeries]| y.to_vec(),
            |y: &[TruncSeries]| Ok(y.to_vec()),
        );
        let y = vec![TruncSeries::zero(1)];
        assert!(matches!(
            field.eval_jet(0.0, &y),
            Err(Error::DimensionMismatch { .. })
        ));
        let bad_g = semilinear_field(
            2,
            |_t, y: &[TruncSeries]| y.to_vec(),
            |y: &[TruncSeries]| Ok(y[..1].to_vec()),
        );
        let y = vec![TruncSeries::zero(1); 2];
        assert!(bad_g.eval_jet(0.0, &y).is_err());
    }

    #[test]
    fn sampled_taylor_recovers_polynomials() {
        let coeffs = [c(1.0, 0.5), c(-2.0, 0.0), c(0.0, 3.0), c(0.25, 0.0)];
        let p = |t: f64| coeffs.iter().rev().fold(c(0.0, 0.0), |acc, v| acc * t + v);
        let fit = sampled_taylor(p, 3, 0.1);
        for (a, b) in fit.iter().zip(&coeffs) {
            assert!((a - b).norm() < 1e-10);
        }
    }
}
