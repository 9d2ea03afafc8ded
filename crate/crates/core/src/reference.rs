//! Reference solutions of `y' = f(ωt, y)` by an adaptive Dormand-Prince 5(4)
//! pair, and error metrics comparing Taylor-Fourier approximations against
//! them.
//!
//! Step control uses a PI controller (safety 0.9, step ratio clamped to
//! `[0.2, 5]`). Sample times are hit exactly by shortening the step that would
//! pass them, so no interpolation error enters the samples.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::math::sqrt;
use crate::problems::kepler::cartesian_state;
use crate::problems::kepler::PhysicalTime;
use crate::tfcore::{tf_eval, OscillatoryField, TfCoefficients};
use crate::{Error, Result, C64};

/// Smallest accepted tolerance.
pub const MIN_TOL: f64 = 1e-14;
/// Largest accepted tolerance.
pub const MAX_TOL: f64 = 1e-2;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const ALPHA: f64 = 0.17;
const BETA: f64 = 0.04;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integration counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RkStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// States sampled at increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub times: Vec<f64>,
    pub states: Vec<Vec<C64>>,
    pub tol: f64,
    pub stats: RkStats,
}

impl ReferenceSolution {
    /// Index of the sample at `t`, allowing a few ulps of slack.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let slack = 4.0 * f64::EPSILON * t.abs().max(1.0);
        let i = self.times.partition_point(|&s| s < t - slack);
        (i < self.times.len() && (self.times[i] - t).abs() <= slack).then_some(i)
    }

    pub fn state_at(&self, t: f64) -> Result<&[C64]> {
        self.index_of(t)
            .map(|i| self.states[i].as_slice())
            .ok_or(Error::TimeMismatch { t })
    }
}

fn weighted_rms(err: &[C64], y: &[C64], y_new: &[C64], tol: f64) -> f64 {
    let sum: f64 = err
        .iter()
        .zip(y)
        .zip(y_new)
        .map(|((e, a), b)| {
            let sc = tol + tol * a.norm().max(b.norm());
            let r = e.norm() / sc;
            r * r
        })
        .sum();
    sqrt(sum / err.len() as f64)
}

fn check_finite(v: &[C64], t: f64) -> Result<()> {
    if v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteState { t })
    }
}

/// Integrates `y' = f(ωt, y)` from 0 and records the state at `sample_times`.
///
/// `f` receives the phase `θ = ωt`. Sample times must be sorted, finite and
/// lie in `[0, t_end]`; integration stops at `t_end`. A sample at 0 returns
/// `y0` unchanged.
pub fn rk_solve<F>(
    mut f: F,
    y0: &[C64],
    omega: f64,
    t_end: f64,
    tol: f64,
    sample_times: &[f64],
) -> Result<ReferenceSolution>
where
    F: FnMut(f64, &[C64]) -> Result<Vec<C64>>,
{
    if !(MIN_TOL..=MAX_TOL).contains(&tol) {
        return Err(Error::InvalidConfig(format!(
            "oracle tolerance {tol} outside [{MIN_TOL}, {MAX_TOL}]"
        )));
    }
    if !t_end.is_finite() || t_end < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "t_end must be finite and >= 0, got {t_end}"
        )));
    }
    if !omega.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "omega must be finite, got {omega}"
        )));
    }
    if sample_times
        .windows(2)
        .any(|w| w[0].partial_cmp(&w[1]) != Some(core::cmp::Ordering::Less))
        || sample_times.iter().any(|t| !(0.0..=t_end).contains(t))
    {
        return Err(Error::InvalidConfig(
            "sample times must be strictly increasing within [0, t_end]".into(),
        ));
    }
    let dim = y0.len();
    let mut stats = RkStats::default();
    let mut rhs = |t: f64, y: &[C64], stats: &mut RkStats| -> Result<Vec<C64>> {
        stats.evaluations += 1;
        let out = f(omega * t, y)?;
        if out.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: out.len(),
            });
        }
        check_finite(&out, t)?;
        Ok(out)
    };

    let mut times = Vec::with_capacity(sample_times.len());
    let mut states = Vec::with_capacity(sample_times.len());
    let mut targets = sample_times.iter().copied().peekable();
    while let Some(&t) = targets.peek() {
        if t > 0.0 {
            break;
        }
        times.push(t);
        states.push(y0.to_vec());
        targets.next();
    }
    if targets.peek().is_none() {
        return Ok(ReferenceSolution {
            times,
            states,
            tol,
            stats,
        });
    }

    let mut t = 0.0;
    let mut y = y0.to_vec();
    let mut k1 = rhs(t, &y, &mut stats)?;

    // Initial step size estimate.
    let mut h = {
        let scaled = |v: &[C64]| weighted_rms(v, &y, &y, tol);
        let d0 = scaled(&y);
        let d1 = scaled(&k1);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let h0 = h0.min(t_end);
        let y1: Vec<C64> = y.iter().zip(&k1).map(|(a, b)| a + b * h0).collect();
        let f1 = rhs(h0, &y1, &mut stats)?;
        let diff: Vec<C64> = f1.iter().zip(&k1).map(|(a, b)| a - b).collect();
        let d2 = scaled(&diff) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            libm::pow(0.01 / d1.max(d2), 1.0 / 5.0)
        };
        (100.0 * h0).min(h1)
    };

    let mut err_old: f64 = 1e-4;
    let mut rejected_last = false;
    let mut k = vec![vec![C64::new(0.0, 0.0); dim]; 7];
    let mut stage = vec![C64::new(0.0, 0.0); dim];

    while let Some(&target) = targets.peek() {
        if h < 16.0 * f64::EPSILON * t.abs().max(1e-300) || h <= 0.0 || !h.is_finite() {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        let clipped = t + h >= target;
        let step = if clipped { target - t } else { h };

        k[0].copy_from_slice(&k1);
        for s in 1..7 {
            for (i, st) in stage.iter_mut().enumerate() {
                let mut acc = y[i];
                for (r, a) in A[s][..s].iter().enumerate() {
                    if *a != 0.0 {
                        acc += k[r][i] * (a * step);
                    }
                }
                *st = acc;
            }
            k[s] = rhs(t + C[s] * step, &stage, &mut stats)?;
        }
        // FSAL: stage 7 is evaluated at the fifth-order solution.
        let y_new = stage.clone();
        let err_vec: Vec<C64> = (0..dim)
            .map(|i| (0..7).map(|s| k[s][i] * E[s]).sum::<C64>() * step)
            .collect();
        let err = weighted_rms(&err_vec, &y, &y_new, tol);
        if !err.is_finite() {
            return Err(Error::NonFiniteState { t });
        }

        if err <= 1.0 {
            stats.accepted += 1;
            t = if clipped { target } else { t + step };
            y = y_new;
            k1.copy_from_slice(&k[6]);
            let e = err.max(1e-10);
            let mut factor = SAFETY * libm::pow(e, -ALPHA) * libm::pow(err_old, BETA);
            factor = factor.clamp(MIN_FACTOR, MAX_FACTOR);
            if rejected_last {
                factor = factor.min(1.0);
            }
            err_old = err.max(1e-4);
            rejected_last = false;
            // A clipped step keeps the controller's proposal for the full step.
            h = if clipped {
                h.max(step * factor)
            } else {
                step * factor
            };
            if clipped {
                times.push(target);
                states.push(y.clone());
                targets.next();
            }
        } else {
            stats.rejected += 1;
            rejected_last = true;
            let factor = (SAFETY * libm::pow(err, -0.2)).max(MIN_FACTOR);
            h = step * factor;
        }
    }
    Ok(ReferenceSolution {
        times,
        states,
        tol,
        stats,
    })
}

/// [`rk_solve`] driven by an [`OscillatoryField`]'s pointwise evaluation.
pub fn rk_solve_field<F: OscillatoryField + ?Sized>(
    field: &F,
    y0: &[C64],
    omega: f64,
    t_end: f64,
    tol: f64,
    sample_times: &[f64],
) -> Result<ReferenceSolution> {
    rk_solve(
        |th, y| field.eval_point(th, y),
        y0,
        omega,
        t_end,
        tol,
        sample_times,
    )
}

/// Scalar error between an approximate and a reference state at time `t`.
pub trait ErrorMetric {
    fn error(&self, t: f64, approx: &[C64], reference: &[C64]) -> Result<f64>;
}

/// Componentwise maximum absolute difference.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MaxAbs;

impl ErrorMetric for MaxAbs {
    fn error(&self, _t: f64, approx: &[C64], reference: &[C64]) -> Result<f64> {
        max_abs(approx, reference)
    }
}

fn max_abs(a: &[C64], b: &[C64]) -> Result<f64> {
    if a.len() > b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max))
}

/// Maximum absolute difference after mapping both states, e.g. through
/// `e^{tωA}` back to the original variables, scaled by a constant factor.
pub struct MappedMaxAbs<M> {
    pub map: M,
    pub scale: f64,
}

impl<M: Fn(f64, &[C64]) -> Vec<C64>> ErrorMetric for MappedMaxAbs<M> {
    fn error(&self, t: f64, approx: &[C64], reference: &[C64]) -> Result<f64> {
        let a = (self.map)(t, approx);
        let b = (self.map)(t, &reference[..approx.len().min(reference.len())]);
        Ok(self.scale * max_abs(&a, &b)?)
    }
}

/// Relative Euclidean error of the Cartesian position recovered from
/// Kepler `(α, β)` states through the KS map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeplerPosition {
    pub omega: f64,
}

impl ErrorMetric for KeplerPosition {
    fn error(&self, t: f64, approx: &[C64], reference: &[C64]) -> Result<f64> {
        let (qa, _) = cartesian_state(approx, self.omega, t)?;
        let (qr, _) = cartesian_state(reference, self.omega, t)?;
        let diff = sqrt((0..3).map(|i| (qa[i] - qr[i]) * (qa[i] - qr[i])).sum());
        let norm = sqrt(qr.iter().map(|v| v * v).sum());
        Ok(diff / norm)
    }
}

/// Absolute error in physical time against a reference that carries `t` as
/// its ninth component.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalTimeError {
    pub time: PhysicalTime,
}

impl ErrorMetric for PhysicalTimeError {
    fn error(&self, tau: f64, _approx: &[C64], reference: &[C64]) -> Result<f64> {
        let t_ref = reference.get(8).ok_or(Error::DimensionMismatch {
            expected: 9,
            found: reference.len(),
        })?;
        Ok((self.time.eval(tau) - t_ref.re).abs())
    }
}

/// Evaluates `metric` between `tf_eval(c, t)` and the reference at each of
/// `times`, which must all be sample times of `reference`.
pub fn error_curve<M: ErrorMetric + ?Sized>(
    c: &TfCoefficients,
    reference: &ReferenceSolution,
    metric: &M,
    times: &[f64],
) -> Result<Vec<(f64, f64)>> {
    times
        .iter()
        .map(|&t| {
            let r = reference.state_at(t)?;
            Ok((t, metric.error(t, &tf_eval(c, t), r)?))
        })
        .collect()
}
