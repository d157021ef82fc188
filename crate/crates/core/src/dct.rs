//! Orthonormal DCT-II basis and the 2-D block transform `C * X * C^t`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::BlockMatrix;

/// Cosine matrix `C` for one block size, together with its cached transpose.
///
/// `C` is orthonormal, so the inverse transform is simply `C^t * X * C`.
#[derive(Debug, Clone, PartialEq)]
pub struct DctBasis {
    c: BlockMatrix,
    ct: BlockMatrix,
}

impl DctBasis {
    /// `c[u][x] = alpha(u) * cos((2x + 1) * u * pi / 2n)` with
    /// `alpha(0) = sqrt(1/n)` and `alpha(u) = sqrt(2/n)` otherwise.
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidBlockSize(n));
        }
        let nf = n as f64;
        let c = BlockMatrix::from_fn(n, |u, x| {
            let alpha = if u == 0 {
                (1.0 / nf).sqrt()
            } else {
                (2.0 / nf).sqrt()
            };
            alpha * (((2 * x + 1) * u) as f64 * PI / (2.0 * nf)).cos()
        })?;
        let ct = c.transpose();
        Ok(Self { c, ct })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.c.n()
    }

    pub fn matrix(&self) -> &BlockMatrix {
        &self.c
    }

    pub fn transposed(&self) -> &BlockMatrix {
        &self.ct
    }

    fn check(&self, m: &BlockMatrix) -> Result<()> {
        if m.n() != self.n() {
            return Err(Error::DimensionMismatch {
                left: self.n(),
                right: m.n(),
            });
        }
        Ok(())
    }

    /// Spatial block to DCT coefficients.
    pub fn forward2d(&self, block: &BlockMatrix) -> Result<BlockMatrix> {
        self.check(block)?;
        Ok(self.c.matmul_unchecked(block).matmul_unchecked(&self.ct))
    }

    /// DCT coefficients back to a spatial block.
    pub fn inverse2d(&self, coeffs: &BlockMatrix) -> Result<BlockMatrix> {
        self.check(coeffs)?;
        Ok(self.ct.matmul_unchecked(coeffs).matmul_unchecked(&self.c))
    }

    /// Conjugates a spatial operator into the DCT domain: `C * M * C^t`.
    ///
    /// If `y = L * x * R` in pixels then `Y = (C L C^t) * X * (C R C^t)`
    /// in coefficients, because `C^t C = I`.
    pub fn conjugate(&self, m: &BlockMatrix) -> Result<BlockMatrix> {
        self.forward2d(m)
    }

    pub fn unconjugate(&self, m: &BlockMatrix) -> Result<BlockMatrix> {
        self.inverse2d(m)
    }
}
