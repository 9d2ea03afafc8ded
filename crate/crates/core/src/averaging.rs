//! Stroboscopic averaging maps read off Taylor-Fourier coefficients.
//!
//! Writing the approximation as `Y(θ, t)` with `θ = ωt`:
//!
//! - `U(θ) = Y(θ, 0) = Σ_k e^{ikθ} y_{k,0}` is the change of variables,
//! - `W(t) = Y(0, t)` is the averaged flow sampled at `θ = 0`,
//! - `F = ∂_t W(0) = Σ_k y_{k,1}` is the averaged vector field at `y0`.
//!
//! The dummy small parameter of the averaging expansion is fixed to 1.

use alloc::format;
use alloc::vec::Vec;

use crate::math::cis;
use crate::tfcore::{tf_solve, OscillatoryField, TfCoefficients, TfConfig};
use crate::{Error, Result, C64};

/// `U(θ) = Σ_k e^{ikθ} y_{k,0}`, summed as `y0 + Σ_{k≠0} (e^{ikθ} - 1) y_{k,0}`
/// so that `U(0) = y0` exactly.
pub fn map_u(c: &TfCoefficients, theta: f64) -> Vec<C64> {
    let m = c.config().modes as isize;
    (0..c.config().dim)
        .map(|comp| {
            (-m..=m).filter(|&k| k != 0).fold(c.y0()[comp], |acc, k| {
                acc + (cis(k as f64 * theta) - 1.0) * c.coeff(comp, 0, k)
            })
        })
        .collect()
}

/// `W(t) = Σ_j t^j Σ_k y_{k,j}`, including the `t^{d+1}` mean-mode slot.
/// The `j = 0` term is `y0`.
pub fn map_w(c: &TfCoefficients, t: f64) -> Vec<C64> {
    let top = c.degree().min(c.config().degree + 1);
    (0..c.config().dim)
        .map(|comp| {
            let tail = (1..=top).rev().fold(C64::new(0.0, 0.0), |acc, j| {
                (acc + c.slice(comp, j).iter().sum::<C64>()) * t
            });
            c.y0()[comp] + tail
        })
        .collect()
}

/// `F = Σ_k y_{k,1}`; requires at least one pass.
pub fn map_f(c: &TfCoefficients) -> Result<Vec<C64>> {
    if c.degree() == 0 {
        return Err(Error::InvalidConfig(format!(
            "averaged vector field needs degree >= 1, coefficients are at {}",
            c.degree()
        )));
    }
    Ok((0..c.config().dim)
        .map(|comp| c.slice(comp, 1).iter().sum())
        .collect())
}

/// Composes the averaged flow with the change of variables:
/// `w = W(t)` from a solve at `y0`, then `U(ωt)` from a fresh solve at `w`.
///
/// The result approximates `y(t)` in the solver variables; callers apply
/// `e^{tωA}` (or the problem's own map) to compare in original variables.
pub fn averaged_compose<F: OscillatoryField + ?Sized>(
    field: &F,
    config: &TfConfig,
    y0: &[C64],
    t: f64,
) -> Result<Vec<C64>> {
    let base = tf_solve(field, y0, config)?;
    averaged_compose_from(field, &base, t)
}

/// [`averaged_compose`] reusing an existing solve at `y0`.
pub fn averaged_compose_from<F: OscillatoryField + ?Sized>(
    field: &F,
    base: &TfCoefficients,
    t: f64,
) -> Result<Vec<C64>> {
    let w = map_w(base, t);
    let fresh = tf_solve(field, &w, base.config())?;
    Ok(map_u(&fresh, base.config().omega * t))
}
