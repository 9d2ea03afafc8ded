//! Binary coefficient format.
//!
//! Little-endian layout:
//!
//! | field    | type                                   |
//! |----------|----------------------------------------|
//! | magic    | `b"OSCF"`                              |
//! | version  | `u16` (currently 1)                    |
//! | D, M, d  | `u32` each                             |
//! | degree   | `u32`, passes folded into the tensor   |
//! | ω        | `f64`                                  |
//! | problem  | `u32` byte length + UTF-8 descriptor   |
//! | y0       | `D` complex values (`re`, `im` as f64) |
//! | tensor   | `D·(d+2)·(2M+1)` complex values        |
//!
//! The tensor is in (component, j, k) order with `k = -M..=M` fastest.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::tfcore::{TfCoefficients, TfConfig};
use crate::{Error, Result, C64};

pub const MAGIC: [u8; 4] = *b"OSCF";
pub const VERSION: u16 = 1;

/// Coefficients together with the descriptor of the problem they solve.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientFile {
    pub problem: String,
    pub coefficients: TfCoefficients,
}

pub fn encode(problem: &str, c: &TfCoefficients) -> Vec<u8> {
    let cfg = c.config();
    let mut out = Vec::with_capacity(34 + problem.len() + 16 * (c.y0().len() + c.data().len()));
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for v in [cfg.dim, cfg.modes, cfg.degree, c.degree()] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    out.extend_from_slice(&cfg.omega.to_le_bytes());
    out.extend_from_slice(&(problem.len() as u32).to_le_bytes());
    out.extend_from_slice(problem.as_bytes());
    for z in c.y0().iter().chain(c.data()) {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Parse {
                offset: self.pos,
                message: format!("truncated input while reading {what}"),
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()) as usize)
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn complex(&mut self, what: &str) -> Result<C64> {
        let re = self.f64(what)?;
        let im = self.f64(what)?;
        Ok(C64::new(re, im))
    }
}

pub fn decode(bytes: &[u8]) -> Result<CoefficientFile> {
    let mut r = Reader { bytes, pos: 0 };
    let magic = r.take(4, "magic")?;
    if magic != MAGIC {
        return Err(Error::Parse {
            offset: 0,
            message: "not a coefficient file (bad magic)".into(),
        });
    }
    let version = r.u16("version")?;
    if version != VERSION {
        return Err(Error::Schema(format!(
            "unsupported format version {version}"
        )));
    }
    let dim = r.u32("dimension")?;
    let modes = r.u32("M")?;
    let degree = r.u32("d")?;
    let passes = r.u32("degree")?;
    let omega = r.f64("omega")?;
    let config = TfConfig::new(modes, degree, omega, dim)
        .map_err(|e| Error::Schema(format!("invalid header: {e}")))?;
    let id_len = r.u32("problem id length")?;
    let id_offset = r.pos;
    let problem = core::str::from_utf8(r.take(id_len, "problem id")?)
        .map_err(|_| Error::Parse {
            offset: id_offset,
            message: "problem id is not UTF-8".into(),
        })?
        .into();
    let y0 = (0..dim)
        .map(|_| r.complex("y0"))
        .collect::<Result<Vec<_>>>()?;
    let count = dim
        .checked_mul(config.slots())
        .and_then(|v| v.checked_mul(config.mode_len()))
        .ok_or_else(|| Error::Schema("tensor shape overflows".into()))?;
    let remaining = (bytes.len() - r.pos) / 16;
    if remaining < count {
        // Report the offset where the data runs out.
        return Err(Error::Parse {
            offset: r.pos + 16 * remaining,
            message: format!("truncated input: tensor needs {count} values, found {remaining}"),
        });
    }
    let mut data = Vec::with_capacity(count);
    for _ in 0..count {
        data.push(r.complex("tensor")?);
    }
    if r.pos != bytes.len() {
        return Err(Error::Schema(format!(
            "{} trailing bytes after the coefficient tensor",
            bytes.len() - r.pos
        )));
    }
    let coefficients = TfCoefficients::from_parts(config, passes, y0, data)?;
    Ok(CoefficientFile {
        problem,
        coefficients,
    })
}
