//! The `(M,d)`-Taylor-Fourier solver.
//!
//! Each pass raises the Taylor degree by one:
//!
//! 1. evaluate every degree slice `Y_j(θ)` at the nodes `θ_n = nπ/M`
//!    (inverse DFT after mode packing);
//! 2. expand `f(θ_n, Σ t^j Y_{n,j})` to the current degree with jet arithmetic;
//! 3. interpolate the node jets back to modes `z_{k,j}` (forward DFT);
//! 4. integrate `y0 + ∫₀ᵗ Σ_k e^{ikωs} Σ_j s^j z_{k,j} ds` exactly.
//!
//! `d` passes from the constant `y0` give the `(M,d)` approximation. The
//! library does not pick `M`: for a field with Fourier bandwidth `M0`,
//! `M ≥ (d+1)·M0` makes the interpolation in step 3 exact.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::fourier::{node_angle, FourierPlan};
use crate::math::cis;
use crate::tps::TruncSeries;
use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Discretization parameters of a solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TfConfig {
    /// Fourier truncation `M`: modes `k = -M..=M`, `2M` nodes.
    pub modes: usize,
    /// Taylor degree `d` (number of passes).
    pub degree: usize,
    /// Base frequency `ω`.
    pub omega: f64,
    /// State dimension `D`.
    pub dim: usize,
    /// Experimental: extra passes at the final degree after the `d` regular
    /// ones. Each one fills the `t^{d+1}` mean-mode slot. Default 0.
    pub extra_passes: usize,
    /// Use the paired real-FFT path for fields that report
    /// [`OscillatoryField::is_real`].
    pub real_fft: bool,
}

impl TfConfig {
    pub fn new(modes: usize, degree: usize, omega: f64, dim: usize) -> Result<Self> {
        let cfg = Self {
            modes,
            degree,
            omega,
            dim,
            extra_passes: 0,
            real_fft: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes == 0 {
            return Err(Error::InvalidConfig("M must be at least 1".into()));
        }
        if self.degree == 0 {
            return Err(Error::InvalidConfig("d must be at least 1".into()));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "omega must be positive and finite, got {}",
                self.omega
            )));
        }
        if self.dim == 0 {
            return Err(Error::InvalidConfig("dim must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of stored Taylor slots, `d + 2`.
    #[inline]
    pub fn slots(&self) -> usize {
        self.degree + 2
    }

    /// Number of stored modes, `2M + 1`.
    #[inline]
    pub fn mode_len(&self) -> usize {
        2 * self.modes + 1
    }
}

/// A `2π`-periodic field `f(θ, y)` evaluated on jets.
///
/// `eval_jet` must return the degree-`d` Taylor truncation of
/// `t ↦ f(θ, y(t))` where `y` holds `dim()` jets of degree `d`.
pub trait OscillatoryField: Sync {
    fn dim(&self) -> usize;

    fn eval_jet(&self, theta: f64, y: &[TruncSeries]) -> Result<Vec<TruncSeries>>;

    /// True for real-domain problems, whose coefficients satisfy
    /// `y_{-k,j} = conj(y_{k,j})`.
    fn is_real(&self) -> bool {
        false
    }

    /// Pointwise `f(θ, y)`.
    fn eval_point(&self, theta: f64, y: &[C64]) -> Result<Vec<C64>> {
        let jets: Vec<TruncSeries> = y.iter().map(|&v| TruncSeries::constant(v, 0)).collect();
        Ok(self
            .eval_jet(theta, &jets)?
            .into_iter()
            .map(|s| s.constant_term())
            .collect())
    }
}

impl<F: OscillatoryField + ?Sized> OscillatoryField for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval_jet(&self, theta: f64, y: &[TruncSeries]) -> Result<Vec<TruncSeries>> {
        (**self).eval_jet(theta, y)
    }
    fn is_real(&self) -> bool {
        (**self).is_real()
    }
    fn eval_point(&self, theta: f64, y: &[C64]) -> Result<Vec<C64>> {
        (**self).eval_point(theta, y)
    }
}

/// Coefficients `y_{k,j}` of
/// `t^{d+1} y_{0,d+1} + Σ_k e^{ikωt} Σ_{j≤d} t^j y_{k,j}`.
///
/// Stored densely in (component, j, k) order with `j = 0..=d+1` and
/// `k = -M..=M`. After `δ` passes only the slots `j ≤ δ` can be nonzero, and
/// slot `δ` only at `k = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TfCoefficients {
    config: TfConfig,
    degree: usize,
    y0: Vec<C64>,
    data: Vec<C64>,
}

impl TfCoefficients {
    /// The degree-0 approximation `y(t) = y0`.
    pub fn constant(config: TfConfig, y0: &[C64]) -> Result<Self> {
        config.validate()?;
        if y0.len() != config.dim {
            return Err(Error::DimensionMismatch {
                expected: config.dim,
                found: y0.len(),
            });
        }
        let mut out = Self {
            config,
            degree: 0,
            y0: y0.to_vec(),
            data: vec![ZERO; config.dim * config.slots() * config.mode_len()],
        };
        for (c, &v) in y0.iter().enumerate() {
            *out.coeff_mut(c, 0, 0) = v;
        }
        Ok(out)
    }

    /// Reassembles coefficients from raw parts, checking the tensor shape.
    pub fn from_parts(
        config: TfConfig,
        degree: usize,
        y0: Vec<C64>,
        data: Vec<C64>,
    ) -> Result<Self> {
        config.validate()?;
        if y0.len() != config.dim {
            return Err(Error::Schema(format!(
                "y0 has {} entries, dimension is {}",
                y0.len(),
                config.dim
            )));
        }
        let expected = config.dim * config.slots() * config.mode_len();
        if data.len() != expected {
            return Err(Error::Schema(format!(
                "coefficient tensor has {} entries, shape implies {}",
                data.len(),
                expected
            )));
        }
        if degree > config.degree + 1 {
            return Err(Error::Schema(format!(
                "degree {} exceeds storage for d = {}",
                degree, config.degree
            )));
        }
        Ok(Self {
            config,
            degree,
            y0,
            data,
        })
    }

    #[inline]
    pub fn config(&self) -> &TfConfig {
        &self.config
    }

    /// Number of passes folded into these coefficients.
    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    pub fn y0(&self) -> &[C64] {
        &self.y0
    }

    /// Raw tensor in (component, j, k) order.
    #[inline]
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    fn index(&self, c: usize, j: usize, k: isize) -> usize {
        let m = self.config.modes as isize;
        debug_assert!(k.abs() <= m);
        (c * self.config.slots() + j) * self.config.mode_len() + (k + m) as usize
    }

    #[inline]
    pub fn coeff(&self, c: usize, j: usize, k: isize) -> C64 {
        self.data[self.index(c, j, k)]
    }

    #[inline]
    pub fn coeff_mut(&mut self, c: usize, j: usize, k: isize) -> &mut C64 {
        let i = self.index(c, j, k);
        &mut self.data[i]
    }

    /// Modes `k = -M..=M` of Taylor slot `j` of component `c`.
    pub fn slice(&self, c: usize, j: usize) -> &[C64] {
        let start = self.index(c, j, -(self.config.modes as isize));
        &self.data[start..start + self.config.mode_len()]
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Highest Taylor slot that may be nonzero.
    #[inline]
    pub(crate) fn top_slot(&self) -> usize {
        self.degree.min(self.config.degree + 1)
    }

    /// Jet values `Y_j(θ_n)` for `j ≤ max_j` on the `2·node_modes` nodes
    /// `θ_n = nπ/node_modes`. `node_modes` may exceed `M`, in which case the
    /// trigonometric polynomials are zero padded.
    pub fn node_values(&self, node_modes: usize, max_j: usize) -> Result<NodeValues> {
        let m = self.config.modes;
        if node_modes < m {
            return Err(Error::InvalidConfig(format!(
                "node grid with {} modes cannot resolve M = {}",
                node_modes, m
            )));
        }
        let plan = FourierPlan::new(node_modes)?;
        let mut nodes = NodeValues::zeros(self.config.dim, max_j, node_modes);
        let padded = 2 * node_modes + 1;
        let mut buf = vec![ZERO; padded];
        for c in 0..self.config.dim {
            for j in 0..=max_j.min(self.config.degree + 1) {
                let src = self.slice(c, j);
                let dst = nodes.slice_mut(c, j);
                if node_modes == m {
                    plan.modes_to_nodes_into(src, dst);
                } else {
                    buf.iter_mut().for_each(|x| *x = ZERO);
                    buf[node_modes - m..node_modes + m + 1].copy_from_slice(src);
                    plan.modes_to_nodes_into(&buf, dst);
                }
            }
        }
        Ok(nodes)
    }
}

/// Jet coefficients at the nodes, (component, j, n) order.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeValues {
    dim: usize,
    degree: usize,
    modes: usize,
    data: Vec<C64>,
}

impl NodeValues {
    pub fn zeros(dim: usize, degree: usize, modes: usize) -> Self {
        Self {
            dim,
            degree,
            modes,
            data: vec![ZERO; dim * (degree + 1) * 2 * modes],
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Mode count `M` of the node grid (there are `2M` nodes).
    #[inline]
    pub fn modes(&self) -> usize {
        self.modes
    }

    #[inline]
    pub fn get(&self, c: usize, j: usize, n: usize) -> C64 {
        self.data[(c * (self.degree + 1) + j) * 2 * self.modes + n]
    }

    #[inline]
    pub fn set(&mut self, c: usize, j: usize, n: usize, v: C64) {
        let i = (c * (self.degree + 1) + j) * 2 * self.modes + n;
        self.data[i] = v;
    }

    pub fn slice(&self, c: usize, j: usize) -> &[C64] {
        let len = 2 * self.modes;
        let start = (c * (self.degree + 1) + j) * len;
        &self.data[start..start + len]
    }

    pub fn slice_mut(&mut self, c: usize, j: usize) -> &mut [C64] {
        let len = 2 * self.modes;
        let start = (c * (self.degree + 1) + j) * len;
        &mut self.data[start..start + len]
    }

    /// The `dim` jets at node `n`.
    pub fn jets_at(&self, n: usize) -> Vec<TruncSeries> {
        (0..self.dim)
            .map(|c| {
                let coeffs = (0..=self.degree).map(|j| self.get(c, j, n)).collect();
                TruncSeries::new(coeffs).expect("degree + 1 >= 1 coefficients")
            })
            .collect()
    }

    fn store_jets(&mut self, n: usize, jets: &[TruncSeries]) {
        for (c, jet) in jets.iter().enumerate() {
            for (j, &v) in jet.coeffs().iter().enumerate() {
                self.set(c, j, n, v);
            }
        }
    }

    /// Interpolates every slice; `real` selects the paired real-FFT path.
    pub fn to_modes(&self, real: bool) -> Result<ModeTensor> {
        let plan = FourierPlan::new(self.modes)?;
        let mut out = ModeTensor::zeros(self.dim, self.degree, self.modes);
        let node_len = 2 * self.modes;
        let mode_len = node_len + 1;
        if real {
            transform_pairs(
                &self.data,
                node_len,
                &mut out.data,
                mode_len,
                |a, b, ma, mb| {
                    let mut scratch = vec![ZERO; node_len];
                    plan.nodes_to_modes_real_pair(a, b, ma, mb, &mut scratch);
                },
                |a, ma| {
                    let mut work = a.to_vec();
                    plan.nodes_to_modes_into(&mut work, ma);
                },
            );
        } else {
            transform_slices(&self.data, node_len, &mut out.data, mode_len, |a, ma| {
                let mut work = a.to_vec();
                plan.nodes_to_modes_into(&mut work, ma);
            });
        }
        Ok(out)
    }
}

/// Mode coefficients `z_{k,j}`, (component, j, k) order, `k = -M..=M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTensor {
    dim: usize,
    degree: usize,
    modes: usize,
    data: Vec<C64>,
}

impl ModeTensor {
    pub fn zeros(dim: usize, degree: usize, modes: usize) -> Self {
        Self {
            dim,
            degree,
            modes,
            data: vec![ZERO; dim * (degree + 1) * (2 * modes + 1)],
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    pub fn modes(&self) -> usize {
        self.modes
    }

    #[inline]
    fn index(&self, c: usize, j: usize, k: isize) -> usize {
        (c * (self.degree + 1) + j) * (2 * self.modes + 1) + (k + self.modes as isize) as usize
    }

    #[inline]
    pub fn get(&self, c: usize, j: usize, k: isize) -> C64 {
        self.data[self.index(c, j, k)]
    }

    #[inline]
    pub fn set(&mut self, c: usize, j: usize, k: isize, v: C64) {
        let i = self.index(c, j, k);
        self.data[i] = v;
    }

    /// `Σ_k e^{ikωt} Σ_j t^j z_{k,j}` for every component.
    pub fn eval(&self, omega: f64, t: f64) -> Vec<C64> {
        let m = self.modes as isize;
        let phases: Vec<C64> = (-m..=m).map(|k| cis(k as f64 * omega * t)).collect();
        (0..self.dim)
            .map(|c| {
                phases
                    .iter()
                    .enumerate()
                    .map(|(p, ph)| {
                        let k = p as isize - m;
                        let poly = (0..=self.degree)
                            .rev()
                            .fold(ZERO, |acc, j| acc * t + self.get(c, j, k));
                        ph * poly
                    })
                    .sum()
            })
            .collect()
    }
}

#[cfg(feature = "parallel")]
fn transform_slices<F>(input: &[C64], in_len: usize, output: &mut [C64], out_len: usize, f: F)
where
    F: Fn(&[C64], &mut [C64]) + Sync,
{
    use rayon::prelude::*;
    output
        .par_chunks_mut(out_len)
        .zip(input.par_chunks(in_len))
        .for_each(|(o, i)| f(i, o));
}

#[cfg(not(feature = "parallel"))]
fn transform_slices<F>(input: &[C64], in_len: usize, output: &mut [C64], out_len: usize, f: F)
where
    F: Fn(&[C64], &mut [C64]),
{
    for (o, i) in output.chunks_mut(out_len).zip(input.chunks(in_len)) {
        f(i, o);
    }
}

fn transform_pairs<P, S>(
    input: &[C64],
    in_len: usize,
    output: &mut [C64],
    out_len: usize,
    pair: P,
    single: S,
) where
    P: Fn(&[C64], &[C64], &mut [C64], &mut [C64]) + Sync,
    S: Fn(&[C64], &mut [C64]) + Sync,
{
    let run = |i: &[C64], o: &mut [C64]| {
        if i.len() == 2 * in_len {
            let (ia, ib) = i.split_at(in_len);
            let (oa, ob) = o.split_at_mut(out_len);
            pair(ia, ib, oa, ob);
        } else {
            single(i, o);
        }
    };
    transform_slices(input, 2 * in_len, output, 2 * out_len, run);
}

/// Step 4: exact integration of `Σ_k e^{ikωs} Σ_j s^j z_{k,j}` from 0 to `t`,
/// plus `y0`.
///
/// For `k ≠ 0`, `y_{k,δ+1} = 0` and `y_{k,j} = (z_{k,j} - (j+1) y_{k,j+1}) / (ikω)`
/// for `j = δ..0`; the mean mode gives `y_{0,j+1} = z_{0,j} / (j+1)` and
/// `y_{0,0} = y0 - Σ_{k≠0} y_{k,0}`.
pub fn quadrature_step(z: &ModeTensor, y0: &[C64], config: &TfConfig) -> Result<TfCoefficients> {
    config.validate()?;
    if z.modes != config.modes {
        return Err(Error::InvalidConfig(format!(
            "mode tensor has M = {}, configuration has M = {}",
            z.modes, config.modes
        )));
    }
    if z.dim != config.dim || y0.len() != config.dim {
        return Err(Error::DimensionMismatch {
            expected: config.dim,
            found: if z.dim != config.dim { z.dim } else { y0.len() },
        });
    }
    let deg = z.degree;
    if deg > config.degree {
        return Err(Error::InvalidConfig(format!(
            "integrand degree {} exceeds d = {}",
            deg, config.degree
        )));
    }
    let omega = config.omega;
    let m = config.modes as isize;
    let mut out = TfCoefficients {
        config: *config,
        degree: deg + 1,
        y0: y0.to_vec(),
        data: vec![ZERO; config.dim * config.slots() * config.mode_len()],
    };
    for (c, &start) in y0.iter().enumerate() {
        let mut oscillating = ZERO;
        for k in (-m..=m).filter(|&k| k != 0) {
            // 1/(ikω) = -i/(kω)
            let factor = C64::new(0.0, -1.0 / (k as f64 * omega));
            let mut next = ZERO;
            for j in (0..=deg).rev() {
                let v = (z.get(c, j, k) - next * (j as f64 + 1.0)) * factor;
                *out.coeff_mut(c, j, k) = v;
                next = v;
            }
            oscillating += next;
        }
        for j in 0..=deg {
            *out.coeff_mut(c, j + 1, 0) = z.get(c, j, 0) / (j as f64 + 1.0);
        }
        *out.coeff_mut(c, 0, 0) = start - oscillating;
    }
    Ok(out)
}

/// Step 2 over all nodes: replaces the `Y` jets by the `Z` jets in place.
fn expand_field<F: OscillatoryField + ?Sized>(field: &F, nodes: &mut NodeValues) -> Result<()> {
    let n_nodes = 2 * nodes.modes;
    let m = nodes.modes;
    let degree = nodes.degree;
    let dim = nodes.dim;
    let eval = |n: usize, nodes: &NodeValues| -> Result<Vec<TruncSeries>> {
        let jets = nodes.jets_at(n);
        let out = field.eval_jet(node_angle(n, m), &jets)?;
        if out.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: out.len(),
            });
        }
        if let Some(bad) = out.iter().find(|s| s.degree() != degree) {
            return Err(Error::DegreeMismatch {
                left: degree,
                right: bad.degree(),
            });
        }
        Ok(out)
    };

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        const CHUNK: usize = 256;
        let mut start = 0;
        while start < n_nodes {
            let end = (start + CHUNK).min(n_nodes);
            let results: Vec<Result<Vec<TruncSeries>>> = (start..end)
                .into_par_iter()
                .map(|n| eval(n, nodes))
                .collect();
            for (n, r) in (start..end).zip(results) {
                nodes.store_jets(n, &r?);
            }
            start = end;
        }
    }
    #[cfg(not(feature = "parallel"))]
    for n in 0..n_nodes {
        let z = eval(n, nodes)?;
        nodes.store_jets(n, &z);
    }
    Ok(())
}

fn run_pass<F: OscillatoryField + ?Sized>(
    field: &F,
    current: &TfCoefficients,
    in_degree: usize,
    pass_index: usize,
) -> Result<TfCoefficients> {
    let cfg = current.config;
    cfg.validate()?;
    if field.dim() != cfg.dim {
        return Err(Error::DimensionMismatch {
            expected: cfg.dim,
            found: field.dim(),
        });
    }
    let real = cfg.real_fft && field.is_real();
    let plan = FourierPlan::new(cfg.modes)?;
    let node_len = 2 * cfg.modes;
    let mode_len = cfg.mode_len();

    // Step 1: slices j = 0..=in_degree of every component.
    let mut nodes = NodeValues::zeros(cfg.dim, in_degree, cfg.modes);
    {
        let slots = cfg.slots();
        let mut packed = Vec::with_capacity(cfg.dim * (in_degree + 1) * mode_len);
        for c in 0..cfg.dim {
            let base = c * slots * mode_len;
            packed.extend_from_slice(&current.data[base..base + (in_degree + 1) * mode_len]);
        }
        if real {
            transform_pairs(
                &packed,
                mode_len,
                &mut nodes.data,
                node_len,
                |a, b, na, nb| {
                    let mut scratch = vec![ZERO; node_len];
                    plan.modes_to_nodes_real_pair(a, b, na, nb, &mut scratch);
                },
                |a, na| plan.modes_to_nodes_into(a, na),
            );
        } else {
            transform_slices(&packed, mode_len, &mut nodes.data, node_len, |a, na| {
                plan.modes_to_nodes_into(a, na)
            });
        }
    }

    // Step 2
    expand_field(field, &mut nodes)?;

    // Step 3
    let z = nodes.to_modes(real)?;
    drop(nodes);

    // Step 4
    let next = quadrature_step(&z, &current.y0, &cfg)?;
    if !next.is_finite() {
        return Err(Error::Divergence { pass: pass_index });
    }
    Ok(next)
}

/// One degree-raising pass `δ → δ + 1`; requires `δ + 1 ≤ d`.
pub fn tf_pass<F: OscillatoryField + ?Sized>(
    field: &F,
    current: &TfCoefficients,
) -> Result<TfCoefficients> {
    let delta = current.degree;
    if delta >= current.config.degree {
        return Err(Error::InvalidConfig(format!(
            "coefficients already at degree {} (d = {})",
            delta, current.config.degree
        )));
    }
    run_pass(field, current, delta, delta + 1)
}

/// Experimental fixed-point pass at the final degree `d`: expands the field
/// to degree `d` and integrates, filling the `t^{d+1}` mean-mode slot.
pub fn tf_polish_pass<F: OscillatoryField + ?Sized>(
    field: &F,
    current: &TfCoefficients,
) -> Result<TfCoefficients> {
    let d = current.config.degree;
    if current.degree < d {
        return Err(Error::InvalidConfig(format!(
            "polishing requires degree {}, coefficients are at {}",
            d, current.degree
        )));
    }
    run_pass(field, current, d, current.degree + 1)
}

/// The `(M,d)`-Taylor-Fourier approximation: `d` passes starting from `y0`,
/// followed by `config.extra_passes` polishing passes.
pub fn tf_solve<F: OscillatoryField + ?Sized>(
    field: &F,
    y0: &[C64],
    config: &TfConfig,
) -> Result<TfCoefficients> {
    if field.dim() != config.dim {
        return Err(Error::DimensionMismatch {
            expected: config.dim,
            found: field.dim(),
        });
    }
    let mut current = TfCoefficients::constant(*config, y0)?;
    for _ in 0..config.degree {
        current = tf_pass(field, &current)?;
    }
    for _ in 0..config.extra_passes {
        current = tf_polish_pass(field, &current)?;
    }
    Ok(current)
}

/// Evaluates `t^{d+1} y_{0,d+1} + Σ_k e^{ikωt} Σ_j t^j y_{k,j}`.
///
/// The `j = 0` slice is summed as `y0 + Σ_{k≠0} (e^{ikωt} - 1) y_{k,0}`,
/// which equals `Σ_k e^{ikωt} y_{k,0}` by construction of the mean mode and
/// returns `y0` exactly at `t = 0`.
pub fn tf_eval(c: &TfCoefficients, t: f64) -> Vec<C64> {
    let cfg = &c.config;
    let m = cfg.modes as isize;
    let top = c.top_slot();
    let theta = cfg.omega * t;
    let phases: Vec<C64> = (-m..=m).map(|k| cis(k as f64 * theta)).collect();
    (0..cfg.dim)
        .map(|comp| {
            let mut acc = c.y0[comp];
            for (p, ph) in phases.iter().enumerate() {
                let k = p as isize - m;
                let poly = (1..=top)
                    .rev()
                    .fold(ZERO, |s, j| (s + c.coeff(comp, j, k)) * t);
                acc += ph * poly;
                if k != 0 {
                    acc += (ph - 1.0) * c.coeff(comp, 0, k);
                }
            }
            acc
        })
        .collect()
}

/// Maps the approximation back to the original variables,
/// `x(t) = e^{tωA} y(t)`; `linear_exp(θ, v)` must apply `e^{θA}`.
pub fn tf_eval_x<E>(linear_exp: E, c: &TfCoefficients, t: f64) -> Vec<C64>
where
    E: Fn(f64, &[C64]) -> Vec<C64>,
{
    linear_exp(c.config.omega * t, &tf_eval(c, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// f(θ, y) = a e^{ik0 θ}, independent of y.
    struct Forcing {
        amp: C64,
        k0: i32,
    }

    impl OscillatoryField for Forcing {
        fn dim(&self) -> usize {
            1
        }
        fn eval_jet(&self, theta: f64, y: &[TruncSeries]) -> Result<Vec<TruncSeries>> {
            Ok(vec![TruncSeries::constant(
                self.amp * cis(self.k0 as f64 * theta),
                y[0].degree(),
            )])
        }
    }

    struct Zero(usize);

    impl OscillatoryField for Zero {
        fn dim(&self) -> usize {
            self.0
        }
        fn is_real(&self) -> bool {
            true
        }
        fn eval_jet(&self, _theta: f64, y: &[TruncSeries]) -> Result<Vec<TruncSeries>> {
            Ok(y.iter().map(|s| TruncSeries::zero(s.degree())).collect())
        }
    }

    /// y' = cos(θ) y + 0.3 sin(2θ) y², a real scalar test problem.
    struct RealLogistic;

    impl OscillatoryField for RealLogistic {
        fn dim(&self) -> usize {
            1
        }
        fn is_real(&self) -> bool {
            true
        }
        fn eval_jet(&self, theta: f64, y: &[TruncSeries]) -> Result<Vec<TruncSeries>> {
            let sq = y[0].mul(&y[0])?;
            let mut out = y[0].scale_real(crate::math::cos(theta));
            out.add_scaled(c(0.3 * crate::math::sin(2.0 * theta), 0.0), &sq)?;
            Ok(vec![out])
        }
    }

    #[test]
    fn config_validation() {
        assert!(TfConfig::new(0, 2, 1.0, 1).is_err());
        assert!(TfConfig::new(2, 0, 1.0, 1).is_err());
        assert!(TfConfig::new(2, 2, 0.0, 1).is_err());
        assert!(TfConfig::new(2, 2, f64::NAN, 1).is_err());
        assert!(TfConfig::new(2, 2, 1.0, 0).is_err());
    }

    #[test]
    fn zero_field_is_a_fixed_point() {
        let cfg = TfConfig::new(4, 3, 2.0, 2).unwrap();
        let y0 = [c(1.0, 0.5), c(-2.0, 0.0)];
        let start = TfCoefficients::constant(cfg, &y0).unwrap();
        let one = tf_pass(&Zero(2), &start).unwrap();
        assert_eq!(one.data(), start.data());
        let solved = tf_solve(&Zero(2), &y0, &cfg).unwrap();
        assert_eq!(solved.data(), start.data());
        assert_eq!(solved.degree(), 3);
    }

    #[test]
    fn single_pass_of_pure_mode_forcing() {
        let field = Forcing {
            amp: c(1.0, 0.0),
            k0: 1,
        };
        for m in [2usize, 5] {
            let cfg = TfConfig::new(m, 2, 1.0, 1).unwrap();
            let start = TfCoefficients::constant(cfg, &[c(0.0, 0.0)]).unwrap();
            let one = tf_pass(&field, &start).unwrap();
            let mi = m as isize;
            for j in 0..cfg.slots() {
                for k in -mi..=mi {
                    let expected = match (j, k) {
                        (0, 1) => c(0.0, -1.0),
                        (0, 0) => c(0.0, 1.0),
                        _ => c(0.0, 0.0),
                    };
                    assert!(
                        (one.coeff(0, j, k) - expected).norm() < 1e-15,
                        "m={m} j={j} k={k}"
                    );
                }
            }
        }
    }

    #[test]
    fn constant_forcing_is_pure_drift() {
        let field = Forcing {
            amp: c(1.0, 0.0),
            k0: 0,
        };
        let cfg = TfConfig::new(3, 2, 1.0, 1).unwrap();
        let start = TfCoefficients::constant(cfg, &[c(0.5, 0.0)]).unwrap();
        let one = tf_pass(&field, &start).unwrap();
        assert!((one.coeff(0, 1, 0) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((one.coeff(0, 0, 0) - c(0.5, 0.0)).norm() < 1e-15);
        let others: f64 = one.data().iter().map(|v| v.norm()).sum::<f64>() - 1.5;
        assert!(others.abs() < 1e-14);
    }

    #[test]
    fn quadrature_examples() {
        let cfg = TfConfig::new(2, 2, 2.0, 1).unwrap();
        let mut z = ModeTensor::zeros(1, 0, 2);
        z.set(0, 0, 1, c(1.0, 0.0));
        let y = quadrature_step(&z, &[c(0.0, 0.0)], &cfg).unwrap();
        assert!((y.coeff(0, 0, 1) - c(0.0, -0.5)).norm() < 1e-16);
        assert!((y.coeff(0, 0, 0) - c(0.0, 0.5)).norm() < 1e-16);

        let mut z = ModeTensor::zeros(1, 0, 2);
        z.set(0, 0, 0, c(3.0, -1.0));
        let y = quadrature_step(&z, &[c(0.25, 0.0)], &cfg).unwrap();
        assert_eq!(y.coeff(0, 1, 0), c(3.0, -1.0));
        assert_eq!(y.coeff(0, 0, 0), c(0.25, 0.0));

        // ∫₀ᵗ s e^{is} ds = -it e^{it} + e^{it} - 1
        let cfg = TfConfig::new(2, 2, 1.0, 1).unwrap();
        let mut z = ModeTensor::zeros(1, 1, 2);
        z.set(0, 1, 1, c(1.0, 0.0));
        let y = quadrature_step(&z, &[c(0.0, 0.0)], &cfg).unwrap();
        assert!((y.coeff(0, 1, 1) - c(0.0, -1.0)).norm() < 1e-16);
        assert!((y.coeff(0, 0, 1) - c(1.0, 0.0)).norm() < 1e-16);
        assert!((y.coeff(0, 0, 0) - c(-1.0, 0.0)).norm() < 1e-16);
        assert_eq!(y.coeff(0, 2, 1), c(0.0, 0.0));
    }

    #[test]
    fn quadrature_rejects_bad_input() {
        let cfg = TfConfig::new(2, 1, 1.0, 1).unwrap();
        let z = ModeTensor::zeros(1, 2, 2);
        assert!(quadrature_step(&z, &[c(0.0, 0.0)], &cfg).is_err());
        let z = ModeTensor::zeros(1, 0, 3);
        assert!(quadrature_step(&z, &[c(0.0, 0.0)], &cfg).is_err());
        let mut bad = cfg;
        bad.omega = 0.0;
        let z = ModeTensor::zeros(1, 0, 2);
        assert!(matches!(
            quadrature_step(&z, &[c(0.0, 0.0)], &bad),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn quadrature_is_an_exact_antiderivative() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(21);
        let cfg = TfConfig::new(5, 4, 1.7, 2).unwrap();
        let mut z = ModeTensor::zeros(2, 3, 5);
        for comp in 0..2 {
            for j in 0..=3 {
                for k in -5isize..=5 {
                    z.set(
                        comp,
                        j,
                        k,
                        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    );
                }
            }
        }
        let y0 = [c(0.3, 0.1), c(-1.0, 0.0)];
        let y = quadrature_step(&z, &y0, &cfg).unwrap();
        let at0 = tf_eval(&y, 0.0);
        for (a, b) in at0.iter().zip(&y0) {
            assert!((a - b).norm() < 1e-14);
        }
        let h = 1e-6;
        for _ in 0..20 {
            let t = rng.gen_range(0.0..3.0);
            let fd: Vec<C64> = tf_eval(&y, t + h)
                .iter()
                .zip(tf_eval(&y, t - h))
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect();
            let exact = z.eval(cfg.omega, t);
            for (a, b) in fd.iter().zip(&exact) {
                assert!((a - b).norm() <= 1e-6 * (1.0 + b.norm()));
            }
        }
        for comp in 0..2 {
            for k in -5isize..=5 {
                if k != 0 {
                    assert_eq!(y.coeff(comp, 4, k), c(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn pure_mode_forcing_is_reproduced_exactly() {
        let field = Forcing {
            amp: c(1.0, 0.0),
            k0: 1,
        };
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        for (m, d) in [(2usize, 1usize), (3, 4), (8, 2)] {
            let cfg = TfConfig::new(m, d, 1.0, 1).unwrap();
            let sol = tf_solve(&field, &[c(0.0, 0.0)], &cfg).unwrap();
            for _ in 0..100 {
                let t = rng.gen_range(0.0..2.0 * PI);
                let exact = c(0.0, -1.0) * (cis(t) - 1.0);
                assert!((tf_eval(&sol, t)[0] - exact).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn bandlimited_forcing_is_exact() {
        // y-independent field with modes |k| <= M - 1.
        struct Multi;
        impl OscillatoryField for Multi {
            fn dim(&self) -> usize {
                1
            }
            fn eval_jet(&self, theta: f64, y: &[TruncSeries]) -> Result<Vec<TruncSeries>> {
                let v =
                    c(0.5, 0.0) + c(0.0, 2.0) * cis(2.0 * theta) + c(-1.0, 0.3) * cis(-3.0 * theta);
                Ok(vec![TruncSeries::constant(v, y[0].degree())])
            }
        }
        let cfg = TfConfig::new(4, 3, 2.5, 1).unwrap();
        let y0 = c(1.0, -1.0);
        let sol = tf_solve(&Multi, &[y0], &cfg).unwrap();
        let w = cfg.omega;
        for i in 0..50 {
            let t = i as f64 * 0.13;
            let exact = y0
                + c(0.5, 0.0) * t
                + c(0.0, 2.0) * (cis(2.0 * w * t) - 1.0) / c(0.0, 2.0 * w)
                + c(-1.0, 0.3) * (cis(-3.0 * w * t) - 1.0) / c(0.0, -3.0 * w);
            assert!((tf_eval(&sol, t)[0] - exact).norm() < 1e-12);
        }
    }

    #[test]
    fn real_problem_keeps_conjugate_symmetry_on_both_paths() {
        for real_fft in [false, true] {
            let mut cfg = TfConfig::new(8, 5, 3.0, 1).unwrap();
            cfg.real_fft = real_fft;
            let mut cur = TfCoefficients::constant(cfg, &[c(0.7, 0.0)]).unwrap();
            for _ in 0..cfg.degree {
                cur = tf_pass(&RealLogistic, &cur).unwrap();
                for j in 0..cfg.slots() {
                    for k in 0..=8isize {
                        assert!((cur.coeff(0, j, -k) - cur.coeff(0, j, k).conj()).norm() < 1e-13);
                    }
                }
            }
        }
        let mut a = TfConfig::new(8, 5, 3.0, 1).unwrap();
        let sa = tf_solve(&RealLogistic, &[c(0.7, 0.0)], &a).unwrap();
        a.real_fft = true;
        let sb = tf_solve(&RealLogistic, &[c(0.7, 0.0)], &a).unwrap();
        for (x, y) in sa.data().iter().zip(sb.data()) {
            assert!((x - y).norm() < 1e-13);
        }
    }

    #[test]
    fn initial_condition_holds_after_every_pass() {
        let cfg = TfConfig::new(6, 6, 1.3, 1).unwrap();
        let y0 = [c(0.7, 0.0)];
        let mut cur = TfCoefficients::constant(cfg, &y0).unwrap();
        for _ in 0..cfg.degree {
            cur = tf_pass(&RealLogistic, &cur).unwrap();
            assert!((tf_eval(&cur, 0.0)[0] - y0[0]).norm() <= 4.0 * f64::EPSILON);
        }
        assert!(tf_pass(&RealLogistic, &cur).is_err());
    }

    #[test]
    fn error_decreases_with_degree() {
        // Reference by a fine RK4 integration of y' = f(ωt, y).
        let omega = 4.0;
        let t_end = 0.1 * 2.0 * PI / omega;
        let steps = 20000;
        let h = t_end / steps as f64;
        let rhs = |t: f64, y: C64| RealLogistic.eval_point(omega * t, &[y]).unwrap()[0];
        let mut y = c(0.7, 0.0);
        let mut t = 0.0;
        for _ in 0..steps {
            let k1 = rhs(t, y);
            let k2 = rhs(t + h / 2.0, y + k1 * (h / 2.0));
            let k3 = rhs(t + h / 2.0, y + k2 * (h / 2.0));
            let k4 = rhs(t + h, y + k3 * h);
            y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            t += h;
        }
        let mut prev = f64::INFINITY;
        for d in 1..=6 {
            let cfg = TfConfig::new(32, d, omega, 1).unwrap();
            let sol = tf_solve(&RealLogistic, &[c(0.7, 0.0)], &cfg).unwrap();
            let err = (tf_eval(&sol, t_end)[0] - y).norm();
            assert!(err <= 2.0 * prev + 1e-14, "d={d} err={err} prev={prev}");
            prev = err;
        }
        assert!(prev < 1e-8, "final error {prev}");
    }

    #[test]
    fn mismatched_field_dimension_is_rejected() {
        let cfg = TfConfig::new(2, 1, 1.0, 2).unwrap();
        let start = TfCoefficients::constant(cfg, &[c(0.0, 0.0); 2]).unwrap();
        assert!(matches!(
            tf_pass(&Zero(3), &start),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(tf_solve(&Zero(3), &[c(0.0, 0.0); 2], &cfg).is_err());
    }

    #[test]
    fn divergence_names_the_pass() {
        struct Blowup;
        impl OscillatoryField for Blowup {
            fn dim(&self) -> usize {
                1
            }
            fn eval_jet(&self, _theta: f64, y: &[TruncSeries]) -> Result<Vec<TruncSeries>> {
                let mut out = TruncSeries::zero(y[0].degree());
                if y[0].degree() == 1 {
                    out.coeffs_mut()[0] = c(f64::INFINITY, 0.0);
                } else {
                    out.coeffs_mut()[0] = c(1.0, 0.0);
                }
                Ok(vec![out])
            }
        }
        let cfg = TfConfig::new(2, 3, 1.0, 1).unwrap();
        assert_eq!(
            tf_solve(&Blowup, &[c(0.0, 0.0)], &cfg),
            Err(Error::Divergence { pass: 2 })
        );
    }

    #[test]
    fn polishing_fills_the_top_mean_slot() {
        let mut cfg = TfConfig::new(8, 3, 2.0, 1).unwrap();
        cfg.extra_passes = 1;
        let sol = tf_solve(&RealLogistic, &[c(0.7, 0.0)], &cfg).unwrap();
        assert_eq!(sol.degree(), 4);
        assert!(sol.coeff(0, 4, 0).norm() > 0.0);
        for k in 1..=8isize {
            assert_eq!(sol.coeff(0, 4, k), c(0.0, 0.0));
        }
    }

    #[test]
    fn eval_examples_and_naive_oracle() {
        let cfg = TfConfig::new(3, 2, 1.0, 1).unwrap();
        let co = TfCoefficients::constant(cfg, &[c(2.0, 1.0)]).unwrap();
        assert_eq!(tf_eval(&co, 5.0)[0], c(2.0, 1.0));
        assert_eq!(tf_eval(&co, 0.0)[0], c(2.0, 1.0));
        // Only y_{1,0} = 1, so y0 = Σ_k y_{k,0} = 1.
        let mut co = TfCoefficients::constant(cfg, &[c(1.0, 0.0)]).unwrap();
        *co.coeff_mut(0, 0, 0) = c(0.0, 0.0);
        *co.coeff_mut(0, 0, 1) = c(1.0, 0.0);
        assert!((tf_eval(&co, PI)[0] - c(-1.0, 0.0)).norm() < 1e-15);
        assert_eq!(tf_eval(&co, 0.0)[0], c(1.0, 0.0));

        let mut rng = rand::rngs::StdRng::seed_from_u64(4);
        let cfg = TfConfig::new(4, 3, 1.9, 2).unwrap();
        let data: Vec<C64> = (0..2 * cfg.slots() * cfg.mode_len())
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let y0: Vec<C64> = (0..2)
            .map(|comp| {
                data[comp * cfg.slots() * cfg.mode_len()..][..cfg.mode_len()]
                    .iter()
                    .sum()
            })
            .collect();
        let co = TfCoefficients::from_parts(cfg, 4, y0, data).unwrap();
        for _ in 0..10 {
            let t = rng.gen_range(-2.0..2.0);
            let got = tf_eval(&co, t);
            for (comp, value) in got.iter().enumerate() {
                let mut naive = c(0.0, 0.0);
                let mut scale = 0.0;
                for j in 0..cfg.slots() {
                    for k in -4isize..=4 {
                        let term = co.coeff(comp, j, k)
                            * t.powi(j as i32)
                            * c((k as f64 * 1.9 * t).cos(), (k as f64 * 1.9 * t).sin());
                        naive += term;
                        scale += term.norm();
                    }
                }
                assert!((value - naive).norm() < 1e-13 * scale);
            }
        }
    }

    #[test]
    fn node_values_on_a_finer_grid() {
        let cfg = TfConfig::new(3, 1, 1.0, 1).unwrap();
        let mut co = TfCoefficients::constant(cfg, &[c(1.0, 0.0)]).unwrap();
        *co.coeff_mut(0, 0, 3) = c(0.5, 0.5);
        *co.coeff_mut(0, 0, -3) = c(0.0, -0.25);
        let fine = co.node_values(8, 0).unwrap();
        for n in 0..16 {
            let th = node_angle(n, 8);
            let expected =
                c(1.0, 0.0) + c(0.5, 0.5) * cis(3.0 * th) + c(0.0, -0.25) * cis(-3.0 * th);
            assert!((fine.get(0, 0, n) - expected).norm() < 1e-14);
        }
        assert!(co.node_values(2, 0).is_err());
    }
}
