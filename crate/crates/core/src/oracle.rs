//! Direct spatial-domain filtering, the ground truth for every operator path.
//!
//! Nothing here touches the DCT or the operator matrices: `convolve` is the
//! plain O(n^2 k^2) nested loop.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::BlockMatrix;
use crate::mask::Mask;

/// How pixels outside the block are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PaddingMode {
    /// Out-of-block pixels are 0.
    Zero,
    /// Out-of-block pixels take the value of the nearest edge pixel.
    Replicate,
}

impl PaddingMode {
    pub const ALL: [PaddingMode; 2] = [PaddingMode::Zero, PaddingMode::Replicate];

    pub fn as_str(self) -> &'static str {
        match self {
            PaddingMode::Zero => "zero",
            PaddingMode::Replicate => "replicate",
        }
    }
}

impl fmt::Display for PaddingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PaddingMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "zero" => Ok(PaddingMode::Zero),
            "replicate" => Ok(PaddingMode::Replicate),
            other => Err(format!("unknown padding mode {other:?}")),
        }
    }
}

fn sample(block: &BlockMatrix, i: isize, j: isize, padding: PaddingMode) -> f64 {
    let n = block.n() as isize;
    match padding {
        PaddingMode::Zero => {
            if (0..n).contains(&i) && (0..n).contains(&j) {
                block[(i as usize, j as usize)]
            } else {
                0.0
            }
        }
        PaddingMode::Replicate => block[(i.clamp(0, n - 1) as usize, j.clamp(0, n - 1) as usize)],
    }
}

/// `out(i, j) = sum_{r,c} w[r][c] * in(pad(i + r - h), pad(j + c - h))`.
pub fn convolve(block: &BlockMatrix, mask: &Mask, padding: PaddingMode) -> Result<BlockMatrix> {
    let n = block.n();
    let k = mask.k();
    if k > n {
        return Err(Error::MaskTooLarge { k, n });
    }
    let h = mask.radius() as isize;
    BlockMatrix::from_fn(n, |i, j| {
        let mut acc = 0.0;
        for r in 0..k {
            for c in 0..k {
                let si = i as isize + r as isize - h;
                let sj = j as isize + c as isize - h;
                acc += mask.weight(r, c) * sample(block, si, sj, padding);
            }
        }
        acc
    })
}

/// Rounds half away from zero, then clamps to `[0, 255]`. Row-major output.
pub fn quantize_u8(block: &BlockMatrix) -> Result<Vec<u8>> {
    let n = block.n();
    block
        .as_slice()
        .iter()
        .enumerate()
        .map(|(idx, &v)| {
            if v.is_nan() {
                Err(Error::NanSample {
                    row: idx / n,
                    col: idx % n,
                })
            } else {
                Ok(quantize_sample(v))
            }
        })
        .collect()
}

#[inline]
pub fn quantize_sample(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}
