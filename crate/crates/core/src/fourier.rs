//! Discrete Fourier transforms and the packing between trigonometric
//! polynomials `Σ_{k=-M}^{M} e^{ikθ} m_k` and values on the `2M` equispaced
//! nodes `θ_n = nπ/M`.
//!
//! Mode vectors are stored in the order `k = -M..=M`. The length-`2M` DFT
//! layout only exists inside [`FourierPlan::modes_to_nodes_into`] and
//! [`FourierPlan::nodes_to_modes_into`]:
//!
//! ```text
//! spectrum[0]       <-> m_0
//! spectrum[k]       <-> m_k            k = 1..M-1
//! spectrum[M]       <-> m_M + m_{-M}
//! spectrum[2M - k]  <-> m_{-k}         k = 1..M-1
//! ```
//!
//! Interpolation splits the Nyquist coefficient evenly, `m_M = m_{-M} = Ẑ_M/(4M)`.
//! Evaluation accepts any pair `(m_{-M}, m_M)` since only their sum is visible
//! on the nodes.
//!
//! Transforms of any length are supported. Powers of two use an iterative
//! radix-2 kernel; other lengths go through Bluestein's chirp-z algorithm,
//! which costs roughly three power-of-two transforms of twice the size.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::math::{cis, root_of_unity};
use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// A precomputed complex FFT of fixed length.
#[derive(Debug, Clone)]
pub struct Fft {
    len: usize,
    kind: FftKind,
}

#[derive(Debug, Clone)]
enum FftKind {
    Trivial,
    Radix2 {
        twiddles: Vec<C64>,
        bitrev: Vec<u32>,
    },
    Bluestein {
        inner: Box<Fft>,
        chirp: Vec<C64>,
        kernel: Vec<C64>,
    },
}

impl Fft {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidLength {
                expected: 1,
                found: 0,
            });
        }
        let kind = if len == 1 {
            FftKind::Trivial
        } else if len.is_power_of_two() {
            let bits = len.trailing_zeros();
            let twiddles = (0..len / 2)
                .map(|k| root_of_unity(k as u64, len as u64))
                .collect();
            let bitrev = (0..len as u32)
                .map(|i| i.reverse_bits() >> (32 - bits))
                .collect();
            FftKind::Radix2 { twiddles, bitrev }
        } else {
            let m = (2 * len - 1).next_power_of_two();
            let inner = Fft::new(m)?;
            let n2 = 2 * len as u64;
            // chirp_k = e^{-iπk²/n}
            let chirp: Vec<C64> = (0..len as u64)
                .map(|k| root_of_unity((k * k) % n2, n2))
                .collect();
            let mut kernel = vec![ZERO; m];
            kernel[0] = chirp[0].conj();
            for k in 1..len {
                kernel[k] = chirp[k].conj();
                kernel[m - k] = chirp[k].conj();
            }
            inner.forward(&mut kernel);
            FftKind::Bluestein {
                inner: Box::new(inner),
                chirp,
                kernel,
            }
        };
        Ok(Self { len, kind })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// In place `X_k = Σ_n e^{-2πikn/N} x_n`.
    ///
    /// Panics if `buf.len()` differs from the plan length.
    pub fn forward(&self, buf: &mut [C64]) {
        assert_eq!(buf.len(), self.len, "fft buffer length");
        match &self.kind {
            FftKind::Trivial => {}
            FftKind::Radix2 { twiddles, bitrev } => radix2(buf, twiddles, bitrev),
            FftKind::Bluestein {
                inner,
                chirp,
                kernel,
            } => {
                let m = inner.len();
                let mut work = vec![ZERO; m];
                for ((w, x), c) in work.iter_mut().zip(buf.iter()).zip(chirp) {
                    *w = x * c;
                }
                inner.forward(&mut work);
                for (w, k) in work.iter_mut().zip(kernel) {
                    *w *= k;
                }
                inner.inverse_unnormalized(&mut work);
                let scale = 1.0 / m as f64;
                for ((x, w), c) in buf.iter_mut().zip(&work).zip(chirp) {
                    *x = w * c * scale;
                }
            }
        }
    }

    /// In place `x_n = Σ_k e^{+2πikn/N} X_k` (no `1/N` factor).
    pub fn inverse_unnormalized(&self, buf: &mut [C64]) {
        for x in buf.iter_mut() {
            *x = x.conj();
        }
        self.forward(buf);
        for x in buf.iter_mut() {
            *x = x.conj();
        }
    }
}

fn radix2(buf: &mut [C64], twiddles: &[C64], bitrev: &[u32]) {
    let n = buf.len();
    for (i, &r) in bitrev.iter().enumerate() {
        let r = r as usize;
        if i < r {
            buf.swap(i, r);
        }
    }
    let mut half = 1;
    while half < n {
        let stride = n / (2 * half);
        for start in (0..n).step_by(2 * half) {
            for j in 0..half {
                let w = twiddles[j * stride];
                let a = buf[start + j];
                let b = buf[start + j + half] * w;
                buf[start + j] = a + b;
                buf[start + j + half] = a - b;
            }
        }
        half *= 2;
    }
}

/// Trigonometric polynomial coefficients for `k = -M..=M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeVector {
    m: usize,
    modes: Vec<C64>,
}

impl ModeVector {
    pub fn new(m: usize, modes: Vec<C64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidConfig(
                "mode count M must be at least 1".into(),
            ));
        }
        if modes.len() != 2 * m + 1 {
            return Err(Error::InvalidLength {
                expected: 2 * m + 1,
                found: modes.len(),
            });
        }
        Ok(Self { m, modes })
    }

    pub fn zeros(m: usize) -> Result<Self> {
        Self::new(m, vec![ZERO; 2 * m + 1])
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// Coefficient of `e^{ikθ}`; panics if `|k| > M`.
    #[inline]
    pub fn get(&self, k: isize) -> C64 {
        self.modes[(k + self.m as isize) as usize]
    }

    #[inline]
    pub fn set(&mut self, k: isize, value: C64) {
        let idx = (k + self.m as isize) as usize;
        self.modes[idx] = value;
    }

    #[inline]
    pub fn as_slice(&self) -> &[C64] {
        &self.modes
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.modes
    }
}

/// Values at the nodes `θ_n = nπ/M`, `n = 0..2M`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeVector {
    values: Vec<C64>,
}

impl NodeVector {
    pub fn new(values: Vec<C64>) -> Result<Self> {
        if values.is_empty() || !values.len().is_multiple_of(2) {
            return Err(Error::InvalidLength {
                expected: (values.len() + 1) & !1usize,
                found: values.len(),
            });
        }
        Ok(Self { values })
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.values.len() / 2
    }

    #[inline]
    pub fn as_slice(&self) -> &[C64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.values
    }
}

/// Node angle `θ_n = nπ/M`.
#[inline]
pub fn node_angle(n: usize, m: usize) -> f64 {
    n as f64 * PI / m as f64
}

/// FFT plan bound to a mode count `M` (transform length `2M`).
#[derive(Debug, Clone)]
pub struct FourierPlan {
    m: usize,
    fft: Fft,
}

impl FourierPlan {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidConfig(
                "mode count M must be at least 1".into(),
            ));
        }
        Ok(Self {
            m,
            fft: Fft::new(2 * m)?,
        })
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn nodes(&self) -> usize {
        2 * self.m
    }

    pub fn fft(&self) -> &Fft {
        &self.fft
    }

    /// Writes `Σ_k e^{ikθ_n} modes[k]` into `nodes` (length `2M`).
    pub fn modes_to_nodes_into(&self, modes: &[C64], nodes: &mut [C64]) {
        let m = self.m;
        debug_assert_eq!(modes.len(), 2 * m + 1);
        pack_spectrum(modes, m, nodes);
        // The 2M scaling of the packed spectrum cancels the 1/(2M) of the
        // normalized inverse transform.
        self.fft.inverse_unnormalized(nodes);
    }

    /// Interpolates node values; `nodes` is overwritten with its DFT.
    pub fn nodes_to_modes_into(&self, nodes: &mut [C64], modes: &mut [C64]) {
        debug_assert_eq!(nodes.len(), 2 * self.m);
        self.fft.forward(nodes);
        unpack_spectrum(nodes, self.m, modes);
    }

    /// Real-signal fast path for [`Self::modes_to_nodes_into`]: both mode
    /// vectors must be conjugate symmetric (`m_{-k} = conj(m_k)`), so both
    /// node vectors are real and one complex transform serves the pair.
    pub fn modes_to_nodes_real_pair(
        &self,
        a: &[C64],
        b: &[C64],
        a_nodes: &mut [C64],
        b_nodes: &mut [C64],
        scratch: &mut [C64],
    ) {
        let m = self.m;
        pack_spectrum(a, m, a_nodes);
        pack_spectrum(b, m, b_nodes);
        let (sa, sb) = (unit_scale(a_nodes), unit_scale(b_nodes));
        for ((s, x), y) in scratch.iter_mut().zip(a_nodes.iter()).zip(b_nodes.iter()) {
            let (x, y) = (x * sa, y * sb);
            *s = C64::new(x.re - y.im, x.im + y.re);
        }
        self.fft.inverse_unnormalized(scratch);
        let (ia, ib) = (1.0 / sa, 1.0 / sb);
        for ((s, x), y) in scratch
            .iter()
            .zip(a_nodes.iter_mut())
            .zip(b_nodes.iter_mut())
        {
            *x = C64::new(s.re * ia, 0.0);
            *y = C64::new(s.im * ib, 0.0);
        }
    }

    /// Real-signal fast path for [`Self::nodes_to_modes_into`]: interpolates
    /// two real node vectors with a single complex transform. The resulting
    /// modes are exactly conjugate symmetric.
    pub fn nodes_to_modes_real_pair(
        &self,
        a_nodes: &[C64],
        b_nodes: &[C64],
        a: &mut [C64],
        b: &mut [C64],
        scratch: &mut [C64],
    ) {
        let n = 2 * self.m;
        let (sa, sb) = (unit_scale(a_nodes), unit_scale(b_nodes));
        for ((s, x), y) in scratch.iter_mut().zip(a_nodes).zip(b_nodes) {
            *s = C64::new(x.re * sa, y.re * sb);
        }
        self.fft.forward(scratch);
        let mut spec_a = vec![ZERO; n];
        let mut spec_b = vec![ZERO; n];
        let (ha, hb) = (0.5 / sa, C64::new(0.0, -0.5 / sb));
        for k in 0..n {
            let x = scratch[k];
            let y = scratch[(n - k) % n].conj();
            spec_a[k] = (x + y) * ha;
            spec_b[k] = (x - y) * hb;
        }
        unpack_spectrum(&spec_a, self.m, a);
        unpack_spectrum(&spec_b, self.m, b);
        for v in [&mut *a, &mut *b] {
            let m = self.m;
            v[m].im = 0.0;
            for k in 1..=m {
                v[m - k] = v[m + k].conj();
            }
        }
    }
}

/// Power of two bringing the largest entry of `v` near 1, so that two signals
/// sharing one complex transform carry comparable rounding errors. Scaling by
/// a power of two is exact.
fn unit_scale(v: &[C64]) -> f64 {
    let peak = v
        .iter()
        .map(|z| z.re.abs().max(z.im.abs()))
        .fold(0.0, f64::max);
    if peak == 0.0 || !peak.is_finite() {
        return 1.0;
    }
    let (_, exp) = libm::frexp(peak);
    libm::ldexp(1.0, (-exp).clamp(-1000, 1000))
}

fn pack_spectrum(modes: &[C64], m: usize, spectrum: &mut [C64]) {
    spectrum[0] = modes[m];
    spectrum[m] = modes[0] + modes[2 * m];
    for k in 1..m {
        spectrum[k] = modes[m + k];
        spectrum[2 * m - k] = modes[m - k];
    }
}

fn unpack_spectrum(spectrum: &[C64], m: usize, modes: &mut [C64]) {
    let inv = 1.0 / (2 * m) as f64;
    modes[m] = spectrum[0] * inv;
    let nyquist = spectrum[m] * (0.5 * inv);
    modes[0] = nyquist;
    modes[2 * m] = nyquist;
    for k in 1..m {
        modes[m + k] = spectrum[k] * inv;
        modes[m - k] = spectrum[2 * m - k] * inv;
    }
}

fn check_even(len: usize) -> Result<()> {
    if len == 0 {
        return Err(Error::InvalidConfig(
            "transform length 2M requires M >= 1".into(),
        ));
    }
    if !len.is_multiple_of(2) {
        return Err(Error::InvalidLength {
            expected: len + 1,
            found: len,
        });
    }
    Ok(())
}

/// `Ẑ_k = Σ_n e^{-iknπ/M} v_n`.
pub fn dft_forward(v: &[C64]) -> Result<Vec<C64>> {
    check_even(v.len())?;
    let mut out = v.to_vec();
    Fft::new(v.len())?.forward(&mut out);
    Ok(out)
}

/// `v_n = (1/2M) Σ_k e^{iknπ/M} s_k`.
pub fn dft_inverse(s: &[C64]) -> Result<Vec<C64>> {
    check_even(s.len())?;
    let mut out = s.to_vec();
    Fft::new(s.len())?.inverse_unnormalized(&mut out);
    let scale = 1.0 / s.len() as f64;
    for x in out.iter_mut() {
        *x *= scale;
    }
    Ok(out)
}

pub fn modes_to_nodes(m: &ModeVector) -> NodeVector {
    let plan = FourierPlan::new(m.m()).expect("ModeVector guarantees M >= 1");
    let mut nodes = vec![ZERO; 2 * m.m()];
    plan.modes_to_nodes_into(m.as_slice(), &mut nodes);
    NodeVector { values: nodes }
}

pub fn nodes_to_modes(v: &NodeVector) -> ModeVector {
    let plan = FourierPlan::new(v.m()).expect("NodeVector guarantees M >= 1");
    let mut work = v.as_slice().to_vec();
    let mut modes = vec![ZERO; 2 * v.m() + 1];
    plan.nodes_to_modes_into(&mut work, &mut modes);
    ModeVector { m: v.m(), modes }
}

/// Direct sum `Σ_{k=-M}^{M} e^{ikθ} m_k`.
pub fn eval_trig(m: &ModeVector, theta: f64) -> C64 {
    eval_trig_slice(m.as_slice(), m.m(), theta)
}

pub(crate) fn eval_trig_slice(modes: &[C64], m: usize, theta: f64) -> C64 {
    let mut acc = modes[m];
    for k in 1..=m {
        let phase = cis(k as f64 * theta);
        acc += phase * modes[m + k] + phase.conj() * modes[m - k];
    }
    acc
}
