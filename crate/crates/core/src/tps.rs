//! Truncated power series ("jets") in one real variable `t` with complex
//! coefficients.
//!
//! A [`TruncSeries`] of degree `d` stores `c_0..=c_d` and stands for
//! `Σ c_j t^j + O(t^{d+1})`. Every ring operation truncates back to `d`, and
//! mixing degrees is an error. [`TruncSeries::integrate`] is the only
//! operation that raises the degree.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct TruncSeries {
    coeffs: Vec<C64>,
}

impl TruncSeries {
    /// Builds a series from its coefficients `c_0..=c_d`.
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidLength {
                expected: 1,
                found: 0,
            });
        }
        Ok(Self { coeffs })
    }

    pub fn zero(degree: usize) -> Self {
        Self {
            coeffs: vec![C64::new(0.0, 0.0); degree + 1],
        }
    }

    pub fn constant(value: C64, degree: usize) -> Self {
        let mut s = Self::zero(degree);
        s.coeffs[0] = value;
        s
    }

    /// The series `c_0 + c_1 t`, truncated to `degree` (which must be at least 1
    /// for the linear term to survive).
    pub fn linear(c0: C64, c1: C64, degree: usize) -> Self {
        let mut s = Self::constant(c0, degree);
        if degree >= 1 {
            s.coeffs[1] = c1;
        }
        s
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    #[inline]
    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    #[inline]
    pub fn constant_term(&self) -> C64 {
        self.coeffs[0]
    }

    fn check_degree(&self, other: &Self) -> Result<()> {
        if self.coeffs.len() != other.coeffs.len() {
            return Err(Error::DegreeMismatch {
                left: self.degree(),
                right: other.degree(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_degree(other)?;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_degree(other)?;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, factor: C64, other: &Self) -> Result<()> {
        self.check_degree(other)?;
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += factor * b;
        }
        Ok(())
    }

    /// Cauchy product truncated to the common degree.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_degree(other)?;
        let n = self.coeffs.len();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (j, slot) in out.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for m in 0..=j {
                acc += self.coeffs[m] * other.coeffs[j - m];
            }
            *slot = acc;
        }
        Ok(Self { coeffs: out })
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// Multiplicative inverse: `b_0 = 1/a_0`, `b_j = -(Σ_{m=1}^{j} a_m b_{j-m}) / a_0`.
    pub fn recip(&self) -> Result<Self> {
        let a0 = self.coeffs[0];
        if a0.norm_sqr() == 0.0 {
            return Err(Error::SingularJet);
        }
        let inv = a0.inv();
        let n = self.coeffs.len();
        let mut out = vec![C64::new(0.0, 0.0); n];
        out[0] = inv;
        for j in 1..n {
            let mut acc = C64::new(0.0, 0.0);
            for m in 1..=j {
                acc += self.coeffs[m] * out[j - m];
            }
            out[j] = -acc * inv;
        }
        Ok(Self { coeffs: out })
    }

    /// Coefficientwise conjugate. Valid as the conjugate of the function
    /// because `t` is real.
    pub fn conj(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c.conj()).collect(),
        }
    }

    /// Antiderivative vanishing at `t = 0`; the result has degree `d + 1`.
    pub fn integrate(&self) -> Self {
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(C64::new(0.0, 0.0));
        for (j, c) in self.coeffs.iter().enumerate() {
            out.push(c / (j as f64 + 1.0));
        }
        Self { coeffs: out }
    }

    /// Coefficient-shift derivative; lowers the degree by one (degree 0 maps to
    /// the zero series of degree 0).
    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero(0);
        }
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, c)| c * j as f64)
                .collect(),
        }
    }

    /// Horner evaluation at real `t`.
    pub fn eval(&self, t: f64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, c| acc * t + c)
    }
}
