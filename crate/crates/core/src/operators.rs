//! Compiling a mask into sandwich operators `X -> L * X * R`.
//!
//! Each mask row `r` becomes one pair: a 0/1 shift matrix on the left that
//! picks the input row `i + r - h` for output row `i`, and a band matrix on
//! the right that slides the row's weights across columns. Summing the pairs
//! reproduces the spatial filter. Because `C^t C = I`, conjugating both
//! factors by the DCT basis yields operators that act directly on DCT
//! coefficients.

use std::fmt;
use std::str::FromStr;

use crate::dct::DctBasis;
use crate::error::{Error, Result};
use crate::linalg::BlockMatrix;
use crate::mask::Mask;
use crate::oracle::PaddingMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    Spatial,
    Dct,
}

impl Domain {
    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Spatial => "spatial",
            Domain::Dct => "dct",
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Domain {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "spatial" => Ok(Domain::Spatial),
            "dct" => Ok(Domain::Dct),
            other => Err(format!("unknown domain {other:?}")),
        }
    }
}

/// The linear map `X -> left * X * right`.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichPair {
    pub left: BlockMatrix,
    pub right: BlockMatrix,
}

impl SandwichPair {
    pub fn new(left: BlockMatrix, right: BlockMatrix) -> Result<Self> {
        if left.n() != right.n() {
            return Err(Error::DimensionMismatch {
                left: left.n(),
                right: right.n(),
            });
        }
        Ok(Self { left, right })
    }

    pub fn n(&self) -> usize {
        self.left.n()
    }

    pub fn apply(&self, x: &BlockMatrix) -> Result<BlockMatrix> {
        if x.n() != self.n() {
            return Err(Error::DimensionMismatch {
                left: self.n(),
                right: x.n(),
            });
        }
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &BlockMatrix) -> BlockMatrix {
        self.left.matmul_unchecked(x).matmul_unchecked(&self.right)
    }
}

/// How the replicate-padding behaviour of a set is realised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Construction {
    /// Shift and band matrices with zero fill.
    Zero,
    /// Shift and band matrices with clamped indices; any odd `k`.
    Clamped,
    /// Zero-fill pairs plus the six-term 3x3 border correction.
    Corrected,
}

impl Construction {
    pub fn as_str(self) -> &'static str {
        match self {
            Construction::Zero => "zero",
            Construction::Clamped => "clamped",
            Construction::Corrected => "corrected",
        }
    }

    pub fn padding(self) -> PaddingMode {
        match self {
            Construction::Zero => PaddingMode::Zero,
            Construction::Clamped | Construction::Corrected => PaddingMode::Replicate,
        }
    }
}

impl FromStr for Construction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "zero" => Ok(Construction::Zero),
            "clamped" => Ok(Construction::Clamped),
            "corrected" => Ok(Construction::Corrected),
            other => Err(format!("unknown construction {other:?}")),
        }
    }
}

/// A compiled filter: a sum of sandwich pairs.
///
/// `pairs` are the per-row filtering terms; `correction` holds the border
/// replication terms of a [`Construction::Corrected`] set and is empty
/// otherwise. Applying the set sums every pair of both lists.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSet {
    pub pairs: Vec<SandwichPair>,
    pub correction: Vec<SandwichPair>,
    pub n: usize,
    pub k: usize,
    pub construction: Construction,
    pub domain: Domain,
    pub symmetric_merged: bool,
    pub mask_fingerprint: u64,
}

/// Cache key for compiled sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OperatorKey {
    pub mask_fingerprint: u64,
    pub n: usize,
    pub construction: Construction,
    pub domain: Domain,
    pub merged: bool,
}

impl OperatorSet {
    pub fn padding(&self) -> PaddingMode {
        self.construction.padding()
    }

    pub fn key(&self) -> OperatorKey {
        OperatorKey {
            mask_fingerprint: self.mask_fingerprint,
            n: self.n,
            construction: self.construction,
            domain: self.domain,
            merged: self.symmetric_merged,
        }
    }

    pub fn all_pairs(&self) -> impl Iterator<Item = &SandwichPair> {
        self.pairs.iter().chain(&self.correction)
    }

    /// Total sandwich products evaluated per block.
    pub fn sandwich_count(&self) -> usize {
        self.pairs.len() + self.correction.len()
    }

    /// Sum over every pair of `left * x * right`.
    pub fn apply(&self, x: &BlockMatrix) -> Result<BlockMatrix> {
        if x.n() != self.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: x.n(),
            });
        }
        let mut acc = BlockMatrix::zeros(self.n)?;
        for pair in self.all_pairs() {
            acc.add_assign_unchecked(&pair.apply_unchecked(x));
        }
        Ok(acc)
    }

    fn map_factors(&self, f: impl Fn(&BlockMatrix) -> Result<BlockMatrix>) -> Result<Self> {
        let map = |pairs: &[SandwichPair]| -> Result<Vec<SandwichPair>> {
            pairs
                .iter()
                .map(|p| {
                    Ok(SandwichPair {
                        left: f(&p.left)?,
                        right: f(&p.right)?,
                    })
                })
                .collect()
        };
        Ok(Self {
            pairs: map(&self.pairs)?,
            correction: map(&self.correction)?,
            ..self.clone()
        })
    }
}

fn check_fit(k: usize, n: usize) -> Result<()> {
    if k.is_multiple_of(2) {
        return Err(Error::InvalidMask(format!("side {k} is not odd")));
    }
    if k > n {
        return Err(Error::MaskTooLarge { k, n });
    }
    Ok(())
}

/// Row-shift matrix: `(S * X)[i] = X[i - offset]`.
///
/// Zero mode leaves rows whose source falls outside the block empty; with
/// `offset = +1` this is a subdiagonal of ones with an empty first row.
/// Replicate mode clamps the source row, so every row holds exactly one 1.
pub fn build_shift_matrix(n: usize, offset: isize, padding: PaddingMode) -> Result<BlockMatrix> {
    if offset.unsigned_abs() >= n {
        return Err(Error::OffsetOutOfRange { n, offset });
    }
    let last = n as isize - 1;
    let mut s = BlockMatrix::zeros(n)?;
    for i in 0..n {
        let src = i as isize - offset;
        match padding {
            PaddingMode::Zero if (0..=last).contains(&src) => s[(i, src as usize)] = 1.0,
            PaddingMode::Zero => {}
            PaddingMode::Replicate => s[(i, src.clamp(0, last) as usize)] = 1.0,
        }
    }
    Ok(s)
}

/// Column band matrix for one mask row: `(X * T)[:, j] = sum_c w[c] * X[:, j + c - h]`.
///
/// Replicate mode folds weights whose source column leaves the block onto
/// the nearest edge column.
pub fn build_band_matrix(row: &[f64], n: usize, padding: PaddingMode) -> Result<BlockMatrix> {
    let k = row.len();
    check_fit(k, n)?;
    let h = (k / 2) as isize;
    let last = n as isize - 1;
    let mut t = BlockMatrix::zeros(n)?;
    for j in 0..n {
        for (c, &w) in row.iter().enumerate() {
            let src = j as isize + c as isize - h;
            match padding {
                PaddingMode::Zero if (0..=last).contains(&src) => t[(src as usize, j)] += w,
                PaddingMode::Zero => {}
                PaddingMode::Replicate => t[(src.clamp(0, last) as usize, j)] += w,
            }
        }
    }
    Ok(t)
}

/// One pair per mask row; Replicate uses the clamped construction.
pub fn build_spatial_operator_set(
    mask: &Mask,
    n: usize,
    padding: PaddingMode,
) -> Result<OperatorSet> {
    check_fit(mask.k(), n)?;
    let h = mask.radius() as isize;
    let pairs = (0..mask.k())
        .map(|r| {
            Ok(SandwichPair {
                left: build_shift_matrix(n, h - r as isize, padding)?,
                right: build_band_matrix(mask.row(r), n, padding)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OperatorSet {
        pairs,
        correction: Vec::new(),
        n,
        k: mask.k(),
        construction: match padding {
            PaddingMode::Zero => Construction::Zero,
            PaddingMode::Replicate => Construction::Clamped,
        },
        domain: Domain::Spatial,
        symmetric_merged: false,
        mask_fingerprint: mask.fingerprint(),
    })
}

/// Zero-fill pairs plus the six border-correction pairs (3x3 masks only).
pub fn build_corrected_replicate_set(mask: &Mask, n: usize) -> Result<OperatorSet> {
    let mut set = build_spatial_operator_set(mask, n, PaddingMode::Zero)?;
    set.correction = build_replication_correction_3x3(mask, n)?;
    set.construction = Construction::Corrected;
    Ok(set)
}

pub fn build_set(mask: &Mask, n: usize, construction: Construction) -> Result<OperatorSet> {
    match construction {
        Construction::Zero => build_spatial_operator_set(mask, n, PaddingMode::Zero),
        Construction::Clamped => build_spatial_operator_set(mask, n, PaddingMode::Replicate),
        Construction::Corrected => build_corrected_replicate_set(mask, n),
    }
}

/// The six pairs that turn a zero-padded 3x3 result into a replicate-padded one.
///
/// Order: bottom corners, top corners, right side, left side, top side,
/// bottom side. Weights are addressed `w1..w9` row-major.
pub fn build_replication_correction_3x3(mask: &Mask, n: usize) -> Result<Vec<SandwichPair>> {
    if mask.k() != 3 {
        return Err(Error::InvalidMask(format!(
            "six-term correction needs a 3x3 mask, got {0}x{0}",
            mask.k()
        )));
    }
    if n < 3 {
        return Err(Error::MaskTooLarge { k: 3, n });
    }
    let w = |idx: usize| mask.weights()[idx - 1];
    let last = n - 1;

    // first-row / first-column selector
    let mut up_left = BlockMatrix::zeros(n)?;
    up_left[(0, 0)] = 1.0;
    // last-row / last-column selector
    let mut bottom_right = BlockMatrix::zeros(n)?;
    bottom_right[(last, last)] = 1.0;

    // summation order keeps mirrored rows bitwise equal so they can merge
    let mut bottom_corners = BlockMatrix::zeros(n)?;
    bottom_corners[(0, 0)] = w(4) + (w(7) + w(8));
    bottom_corners[(last, last)] = w(6) + (w(8) + w(9));

    let mut up_corners = BlockMatrix::zeros(n)?;
    up_corners[(0, 0)] = w(4) + (w(1) + w(2));
    up_corners[(last, last)] = w(6) + (w(2) + w(3));

    // band with (sub, diag, super) = (a, b, c) and empty corner diagonal entries
    let side = |sub: f64, diag: f64, sup: f64| -> Result<BlockMatrix> {
        BlockMatrix::from_fn(n, |i, j| {
            if i == j + 1 {
                sub
            } else if j == i + 1 {
                sup
            } else if i == j && i != 0 && i != last {
                diag
            } else {
                0.0
            }
        })
    };
    // left-multiplied: out(i, edge) gathers rows i-1, i, i+1 of the edge column
    let right = side(w(3), w(6), w(9))?;
    let left = side(w(1), w(4), w(7))?;
    // right-multiplied: out(edge, j) gathers columns j-1, j, j+1 of the edge row
    let up = side(w(3), w(2), w(1))?;
    let bottom = side(w(9), w(8), w(7))?;

    Ok(vec![
        SandwichPair {
            left: bottom_right.clone(),
            right: bottom_corners,
        },
        SandwichPair {
            left: up_left.clone(),
            right: up_corners,
        },
        SandwichPair {
            left: right,
            right: bottom_right.clone(),
        },
        SandwichPair {
            left,
            right: up_left.clone(),
        },
        SandwichPair {
            left: up_left,
            right: up,
        },
        SandwichPair {
            left: bottom_right,
            right: bottom,
        },
    ])
}

pub fn detect_row_symmetry(mask: &Mask) -> bool {
    mask.is_row_symmetric()
}

/// Conjugates every factor by the DCT basis: `(L, R) -> (C L C^t, C R C^t)`.
pub fn to_dct_domain(set: &OperatorSet, basis: &DctBasis) -> Result<OperatorSet> {
    if set.domain == Domain::Dct {
        return Err(Error::AlreadyDct);
    }
    if basis.n() != set.n {
        return Err(Error::DimensionMismatch {
            left: set.n,
            right: basis.n(),
        });
    }
    let mut out = set.map_factors(|m| basis.conjugate(m))?;
    out.domain = Domain::Dct;
    Ok(out)
}

pub fn to_spatial_domain(set: &OperatorSet, basis: &DctBasis) -> Result<OperatorSet> {
    if set.domain == Domain::Spatial {
        return Err(Error::WrongDomain("dct"));
    }
    if basis.n() != set.n {
        return Err(Error::DimensionMismatch {
            left: set.n,
            right: basis.n(),
        });
    }
    let mut out = set.map_factors(|m| basis.unconjugate(m))?;
    out.domain = Domain::Spatial;
    Ok(out)
}

/// Folds mirrored mask rows that share a band matrix into one pair.
///
/// Row pairs `(r, k-1-r)` with identical right factors become
/// `(L_r + L_{k-1-r}, R_r)`, leaving `ceil(k/2)` filtering pairs. Border
/// correction terms are folded where their paired factors coincide:
/// corners with corners, left side with right side, top with bottom.
pub fn merge_symmetric(set: &OperatorSet) -> Result<OperatorSet> {
    if set.symmetric_merged {
        return Err(Error::AlreadyMerged);
    }
    let k = set.pairs.len();
    if k != set.k {
        return Err(Error::InvalidMask(
            "set does not hold one pair per mask row".into(),
        ));
    }
    let h = k / 2;
    if (0..h).any(|r| set.pairs[r].right != set.pairs[k - 1 - r].right) {
        return Err(Error::NotRowSymmetric);
    }
    let mut pairs = Vec::with_capacity(h + 1);
    for r in 0..h {
        let (a, b) = (&set.pairs[r], &set.pairs[k - 1 - r]);
        pairs.push(SandwichPair {
            left: a.left.add(&b.left)?,
            right: a.right.clone(),
        });
    }
    pairs.push(set.pairs[h].clone());

    Ok(OperatorSet {
        pairs,
        correction: merge_correction(&set.correction)?,
        symmetric_merged: true,
        ..set.clone()
    })
}

fn merge_correction(terms: &[SandwichPair]) -> Result<Vec<SandwichPair>> {
    if terms.len() != 6 {
        return Ok(terms.to_vec());
    }
    let mut out = Vec::with_capacity(6);
    let fold = |a: &SandwichPair, b: &SandwichPair, out: &mut Vec<SandwichPair>| -> Result<()> {
        if a.right == b.right {
            out.push(SandwichPair {
                left: a.left.add(&b.left)?,
                right: a.right.clone(),
            });
        } else if a.left == b.left {
            out.push(SandwichPair {
                left: a.left.clone(),
                right: a.right.add(&b.right)?,
            });
        } else {
            out.push(a.clone());
            out.push(b.clone());
        }
        Ok(())
    };
    fold(&terms[0], &terms[1], &mut out)?;
    fold(&terms[2], &terms[3], &mut out)?;
    fold(&terms[4], &terms[5], &mut out)?;
    Ok(out)
}
