//! POVM files.
//!
//! ```json
//! {
//!   "dimension": 2,
//!   "copies": 1,
//!   "points": [
//!     { "weight": 0.3333333333333333, "amplitudes": [[0.7071067811865476, 0.0], [0.7071067811865476, 0.0]] }
//!   ]
//! }
//! ```
//!
//! Amplitudes are in the computational basis, each complex number written as
//! `[re, im]`. Floats are printed in shortest round-trip form, so a
//! load/save cycle is lossless and byte-stable.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{FramePoint, Povm};
use crate::linalg::CVector;
use crate::qudit::{Dimension, PureState};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PovmFile {
    dimension: usize,
    copies: usize,
    points: Vec<PointFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointFile {
    weight: f64,
    amplitudes: Vec<[f64; 2]>,
}

pub fn povm_to_json(povm: &Povm) -> String {
    let file = PovmFile {
        dimension: povm.dim().get(),
        copies: povm.copies(),
        points: povm
            .points()
            .iter()
            .map(|p| PointFile {
                weight: p.weight,
                amplitudes: p
                    .candidate
                    .amplitudes()
                    .iter()
                    .map(|z| [z.re, z.im])
                    .collect(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("plain data serializes");
    s.push('\n');
    s
}

/// Parses a POVM file. Completeness is not checked here; see
/// [`crate::estimator::validate_povm`].
pub fn povm_from_json(text: &str) -> Result<Povm> {
    let file: PovmFile = serde_json::from_str(text)
        .map_err(|e| Error::Schema(format!("line {} column {}: {}", e.line(), e.column(), e)))?;
    let d = Dimension::new(file.dimension)
        .map_err(|e| Error::Schema(format!("field `dimension`: {e}")))?;
    if file.copies == 0 {
        return Err(Error::Schema("field `copies`: must be at least 1".into()));
    }
    if file.points.is_empty() {
        return Err(Error::Schema("field `points`: empty".into()));
    }
    let mut points = Vec::with_capacity(file.points.len());
    for (i, p) in file.points.into_iter().enumerate() {
        if p.amplitudes.len() != d.get() {
            return Err(Error::Schema(format!(
                "points[{i}].amplitudes: expected {} entries, found {}",
                d.get(),
                p.amplitudes.len()
            )));
        }
        if !p.weight.is_finite() {
            return Err(Error::Schema(format!("points[{i}].weight: not finite")));
        }
        let v = CVector::from_iterator(
            d.get(),
            p.amplitudes.iter().map(|&[re, im]| Complex64::new(re, im)),
        );
        let candidate =
            PureState::new(v).map_err(|e| Error::Schema(format!("points[{i}].amplitudes: {e}")))?;
        points.push(FramePoint {
            candidate,
            weight: p.weight,
        });
    }
    Povm::from_points(d, file.copies, points)
}

pub fn save_povm(povm: &Povm, path: &Path) -> Result<()> {
    std::fs::write(path, povm_to_json(povm))?;
    Ok(())
}

pub fn load_povm(path: &Path) -> Result<Povm> {
    let text = std::fs::read_to_string(path)?;
    povm_from_json(&text)
}
