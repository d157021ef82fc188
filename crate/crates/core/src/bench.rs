//! Operation counts and per-block timings.

use std::time::{Duration, Instant};

use crate::engine::{FilterPlan, PlanOptions};
use crate::error::Result;
use crate::linalg::BlockMatrix;
use crate::mask::Mask;
use crate::operators::{build_set, merge_symmetric, Construction};
use crate::oracle::{convolve, PaddingMode};

/// Sandwich counts per block, before and after symmetric merging.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OperationCounts {
    pub k: usize,
    pub row_symmetric: bool,
    pub filter_sandwiches_unmerged: usize,
    pub filter_sandwiches_merged: usize,
    /// Six-term border correction groups; `None` unless `k == 3`.
    pub replication_groups_unmerged: Option<usize>,
    pub replication_groups_merged: Option<usize>,
}

impl OperationCounts {
    /// Each sandwich `L * X * R` costs two `n x n` products.
    pub fn matmuls(sandwiches: usize) -> usize {
        2 * sandwiches
    }
}

pub fn operation_counts(mask: &Mask, n: usize) -> Result<OperationCounts> {
    let zero = build_set(mask, n, Construction::Zero)?;
    let symmetric = mask.is_row_symmetric();
    let merged_filter = if symmetric {
        merge_symmetric(&zero)?.pairs.len()
    } else {
        zero.pairs.len()
    };
    let (rep_unmerged, rep_merged) = if mask.k() == 3 && n >= 3 {
        let corrected = build_set(mask, n, Construction::Corrected)?;
        let merged = if symmetric {
            merge_symmetric(&corrected)?.correction.len()
        } else {
            corrected.correction.len()
        };
        (Some(corrected.correction.len()), Some(merged))
    } else {
        (None, None)
    };
    Ok(OperationCounts {
        k: mask.k(),
        row_symmetric: symmetric,
        filter_sandwiches_unmerged: zero.pairs.len(),
        filter_sandwiches_merged: merged_filter,
        replication_groups_unmerged: rep_unmerged,
        replication_groups_merged: rep_merged,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Timing {
    pub label: String,
    pub blocks: usize,
    pub total: Duration,
}

impl Timing {
    pub fn per_block(&self) -> Duration {
        self.total / self.blocks.max(1) as u32
    }
}

/// Times the DCT-domain filter (coefficients in, coefficients out) against
/// the direct spatial filter on the same synthetic blocks.
pub fn time_paths(
    mask: &Mask,
    n: usize,
    padding: PaddingMode,
    blocks: usize,
) -> Result<Vec<Timing>> {
    let inputs: Vec<BlockMatrix> = (0..blocks)
        .map(|b| BlockMatrix::from_fn(n, |i, j| ((b * 31 + i * 17 + j * 5) % 256) as f64))
        .collect::<Result<_>>()?;
    let plan = FilterPlan::with_options(mask, n, PlanOptions::for_padding(mask, padding))?;
    let coeffs: Vec<BlockMatrix> = inputs
        .iter()
        .map(|b| plan.basis().forward2d(b))
        .collect::<Result<_>>()?;

    let mut sink = 0.0;
    let start = Instant::now();
    for c in &coeffs {
        sink += plan.filter_block_dct(c)?[(0, 0)];
    }
    let dct = start.elapsed();

    let start = Instant::now();
    for b in &inputs {
        sink += convolve(b, mask, padding)?[(0, 0)];
    }
    let spatial = start.elapsed();
    std::hint::black_box(sink);

    Ok(vec![
        Timing {
            label: "dct".into(),
            blocks,
            total: dct,
        },
        Timing {
            label: "spatial".into(),
            blocks,
            total: spatial,
        },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_halves_replication_groups() {
        let g = operation_counts(&Mask::gaussian3(), 8).unwrap();
        let m = operation_counts(&Mask::magic3(), 8).unwrap();
        assert_eq!(
            (g.filter_sandwiches_unmerged, g.filter_sandwiches_merged),
            (3, 2)
        );
        assert_eq!(
            (g.replication_groups_unmerged, g.replication_groups_merged),
            (Some(6), Some(3))
        );
        assert_eq!(
            (m.filter_sandwiches_unmerged, m.filter_sandwiches_merged),
            (3, 3)
        );
        assert_eq!(m.replication_groups_merged, Some(6));
        assert_eq!(
            g.replication_groups_merged.unwrap() * 2,
            m.replication_groups_merged.unwrap()
        );
    }

    #[test]
    fn identity_is_one_sandwich() {
        let c = operation_counts(&Mask::identity(), 8).unwrap();
        assert_eq!(c.filter_sandwiches_merged, 1);
        assert_eq!(c.replication_groups_unmerged, None);
        assert_eq!(OperationCounts::matmuls(c.filter_sandwiches_merged), 2);
    }

    #[test]
    fn timing_runs() {
        let t = time_paths(&Mask::magic3(), 8, PaddingMode::Replicate, 10).unwrap();
        assert_eq!(t.len(), 2);
        assert!(t.iter().all(|t| t.blocks == 10));
    }
}
