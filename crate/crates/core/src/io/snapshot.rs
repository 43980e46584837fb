//! Binary snapshot files.
//!
//! Layout (little-endian):
//!
//! | bytes | content                                   |
//! |-------|-------------------------------------------|
//! | 7     | magic `OBSREG1`                           |
//! | 2     | format version (`u16`)                    |
//! | 8     | box side `L` (`f64`)                      |
//! | 4     | `n_spec` (`u32`)                          |
//! | 8     | time (`f64`)                              |
//! | 1     | [`SnapshotKind`]                          |
//! | rest  | `n_spec³ × 6` `f64`: per mode in storage order, `x.re x.im y.re y.im z.re z.im` |

use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{SpectralField, TorusConfig};

pub const MAGIC: &[u8; 7] = b"OBSREG1";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 7 + 2 + 8 + 4 + 8 + 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum SnapshotKind {
    /// Reference velocity `u`.
    Velocity = 0,
    /// Nudged velocity `w`.
    Nudged = 1,
    /// Body force `f`.
    Forcing = 2,
}

impl SnapshotKind {
    fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(SnapshotKind::Velocity),
            1 => Some(SnapshotKind::Nudged),
            2 => Some(SnapshotKind::Forcing),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotFile {
    pub time: f64,
    pub kind: SnapshotKind,
    pub field: SpectralField,
}

pub fn encode(snap: &SnapshotFile) -> Vec<u8> {
    let cfg = snap.field.config();
    let mut out = Vec::with_capacity(HEADER_LEN + cfg.n_modes() * 48);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&cfg.length.to_le_bytes());
    out.extend_from_slice(&(cfg.n_spec as u32).to_le_bytes());
    out.extend_from_slice(&snap.time.to_le_bytes());
    out.push(snap.kind as u8);
    for c in snap.field.coeffs() {
        for z in c {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8-byte slice"))
}

/// Parses a snapshot; `path` is only used in error messages.
pub fn decode(bytes: &[u8], path: &Path) -> Result<SnapshotFile> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::format(
            path,
            format!("truncated header: expected at least {HEADER_LEN} bytes, found {}", bytes.len()),
        ));
    }
    if &bytes[..7] != MAGIC {
        return Err(Error::format(path, "not an OBSREG1 snapshot (bad magic)"));
    }
    let version = u16::from_le_bytes([bytes[7], bytes[8]]);
    if version != VERSION {
        return Err(Error::format(
            path,
            format!(
                "snapshot format version {version} is not supported (this build reads version {VERSION}); \
                 upgrade obsreg or re-export the snapshot"
            ),
        ));
    }
    let length = f64_at(bytes, 9);
    let n_spec = u32::from_le_bytes(bytes[17..21].try_into().expect("4-byte slice")) as usize;
    let time = f64_at(bytes, 21);
    let kind = SnapshotKind::from_byte(bytes[29])
        .ok_or_else(|| Error::format(path, format!("unknown snapshot kind {}", bytes[29])))?;
    let config = TorusConfig::new(length, n_spec).map_err(|e| Error::format(path, e.to_string()))?;
    let expected = HEADER_LEN + config.n_modes() * 48;
    if bytes.len() != expected {
        return Err(Error::format(
            path,
            format!(
                "{} file: expected {expected} bytes for n_spec = {n_spec}, found {}",
                if bytes.len() < expected { "truncated" } else { "oversized" },
                bytes.len()
            ),
        ));
    }
    let coeffs = bytes[HEADER_LEN..]
        .chunks_exact(48)
        .map(|m| [0, 1, 2].map(|d| Complex64::new(f64_at(m, 16 * d), f64_at(m, 16 * d + 8))))
        .collect();
    let field = SpectralField::from_coeffs(config, coeffs).map_err(|e| Error::format(path, e.to_string()))?;
    Ok(SnapshotFile { time, kind, field })
}

pub fn save_snapshot(path: &Path, snap: &SnapshotFile) -> Result<()> {
    std::fs::write(path, encode(snap)).map_err(|e| Error::io(path, e))
}

pub fn load_snapshot(path: &Path) -> Result<SnapshotFile> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes, path)
}
