//! Coefficient files on disk and their metadata sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use oscifour_core::codec::{self, CoefficientFile, VERSION};
use oscifour_core::TfCoefficients;

use crate::error::{CliError, CliResult};

/// Path of the sidecar written next to `path`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

/// Human-readable `key=value` record with the header fields.
pub fn sidecar_text(problem: &str, c: &TfCoefficients) -> String {
    let cfg = c.config();
    format!(
        "format_version={VERSION}\nD={}\nM={}\nd={}\ndegree={}\nomega={:?}\nproblem={problem}\n",
        cfg.dim,
        cfg.modes,
        cfg.degree,
        c.degree(),
        cfg.omega
    )
}

pub fn write_coefficients(path: &Path, problem: &str, c: &TfCoefficients) -> CliResult<()> {
    fs::write(path, codec::encode(problem, c)).map_err(|e| CliError::io(path, e))?;
    let meta = sidecar_path(path);
    fs::write(&meta, sidecar_text(problem, c)).map_err(|e| CliError::io(&meta, e))
}

pub fn read_coefficients(path: &Path) -> CliResult<CoefficientFile> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    codec::decode(&bytes).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use oscifour_core::{TfConfig, C64};

    #[test]
    fn write_then_read_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.oscf");
        let cfg = TfConfig::new(3, 2, 1.5, 2).unwrap();
        let c = TfCoefficients::constant(cfg, &[C64::new(1.0, -1.0), C64::new(0.25, 3.0)]).unwrap();
        write_coefficients(&path, "problem=nls;J=2", &c).unwrap();
        let back = read_coefficients(&path).unwrap();
        assert_eq!(back.coefficients, c);
        assert_eq!(back.problem, "problem=nls;J=2");
        let meta = fs::read_to_string(sidecar_path(&path)).unwrap();
        assert!(meta.contains("D=2\nM=3\nd=2\n"), "{meta}");
    }

    #[test]
    fn garbage_is_an_io_error_with_offset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad");
        fs::write(&path, b"OSCF\x01").unwrap();
        let e = read_coefficients(&path).unwrap_err();
        assert_eq!(e.exit_code(), 5);
        assert!(e.to_string().contains("byte"), "{e}");
    }
}
