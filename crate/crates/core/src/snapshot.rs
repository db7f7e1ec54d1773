//! Binary field snapshots and their JSON sidecars.
//!
//! Layout (all little-endian): magic `WWF1`, K (u32), gridSize (u32),
//! field count (u32), then per field the complex coefficients as
//! (re, im) f64 pairs in row-major frequency order, n₁ outer from −K..K.
//! Round trips are bit-exact for `f64` fields.

use crate::conv::{ConvolutionKind, StochasticConvolutionPath};
use crate::error::CoreError;
use crate::field::SpectralField;
use crate::lattice::LatticeSpec;
use crate::scalar::Real;
use crate::Result;
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"WWF1";

/// Write a group of fields sharing one lattice.
pub fn write_fields<F: Real>(path: &Path, fields: &[&SpectralField<F>]) -> Result<()> {
    let lattice = fields
        .first()
        .ok_or_else(|| CoreError::invalid("fields", "nothing to write"))?
        .lattice();
    for f in fields {
        if f.lattice() != lattice {
            return Err(CoreError::LatticeMismatch(
                lattice.max_freq(),
                lattice.grid_size(),
                f.lattice().max_freq(),
                f.lattice().grid_size(),
            ));
        }
    }
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(lattice.max_freq()).to_le_bytes())?;
    w.write_all(&(lattice.grid_size() as u32).to_le_bytes())?;
    w.write_all(&(fields.len() as u32).to_le_bytes())?;
    for f in fields {
        for c in f.coeffs() {
            w.write_all(&c.re.to64().to_le_bytes())?;
            w.write_all(&c.im.to64().to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Read back a snapshot file.
pub fn read_fields<F: Real>(path: &Path) -> Result<(LatticeSpec, Vec<SpectralField<F>>)> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CoreError::MalformedSnapshot(format!(
            "bad magic {magic:?}"
        )));
    }
    let mut buf4 = [0u8; 4];
    r.read_exact(&mut buf4)?;
    let max_freq = u32::from_le_bytes(buf4);
    r.read_exact(&mut buf4)?;
    let grid_size = u32::from_le_bytes(buf4) as usize;
    r.read_exact(&mut buf4)?;
    let count = u32::from_le_bytes(buf4) as usize;
    let lattice = LatticeSpec::new(max_freq, grid_size)?;
    let mut fields = Vec::with_capacity(count);
    let mut buf8 = [0u8; 8];
    for _ in 0..count {
        let mut coeffs = Vec::with_capacity(lattice.num_modes());
        for _ in 0..lattice.num_modes() {
            r.read_exact(&mut buf8)?;
            let re = f64::from_le_bytes(buf8);
            r.read_exact(&mut buf8)?;
            let im = f64::from_le_bytes(buf8);
            coeffs.push(Complex::new(F::of(re), F::of(im)));
        }
        fields.push(SpectralField::from_coeffs(lattice, coeffs)?);
    }
    Ok((lattice, fields))
}

/// JSON sidecar describing an exported convolution path.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PathSidecar {
    pub kind: String,
    pub cutoff: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regularity: Option<f64>,
    pub times: Vec<f64>,
    pub variance: Vec<f64>,
    pub seed: u64,
    /// Fields per record in the .wwf file (position, velocity).
    pub fields_per_time: u32,
}

/// Export a path as `<base>.wwf` + `<base>.json`: one (position,
/// velocity) record per output time plus the sidecar.
pub fn export_path<F: Real>(
    base: &Path,
    path: &StochasticConvolutionPath<F>,
    seed: u64,
) -> Result<()> {
    let mut fields: Vec<&SpectralField<F>> = Vec::with_capacity(2 * path.states.len());
    for s in &path.states {
        fields.push(&s.position);
        fields.push(&s.velocity);
    }
    write_fields(&base.with_extension("wwf"), &fields)?;
    let sidecar = PathSidecar {
        kind: match path.kind {
            ConvolutionKind::Undamped => "undamped".into(),
            ConvolutionKind::Damped => "damped".into(),
        },
        cutoff: path.lattice.ball_radius(),
        regularity: None,
        times: path.times.iter().map(|t| t.to64()).collect(),
        variance: path.variance.iter().map(|v| v.to64()).collect(),
        seed,
        fields_per_time: 2,
    };
    let json = serde_json::to_vec_pretty(&sidecar)?;
    std::fs::write(base.with_extension("json"), json)?;
    Ok(())
}
