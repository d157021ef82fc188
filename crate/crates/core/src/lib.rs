//! Block filtering directly in the DCT domain.
//!
//! A `k x k` mask is compiled into a short list of sandwich operators
//! `X -> L * X * R`, one per mask row, whose sum equals the spatial filter on
//! an `n x n` block with zero or replicated borders. Conjugating every factor
//! by the orthonormal DCT basis gives operators that take DCT coefficients to
//! filtered DCT coefficients, with no inverse transform in between.
//!
//! ```
//! use blockdct::{BlockMatrix, FilterPlan, Mask, PaddingMode, convolve};
//!
//! let plan = FilterPlan::new(&Mask::gaussian3(), 8, PaddingMode::Replicate).unwrap();
//! let block = BlockMatrix::from_fn(8, |i, j| (i * 16 + j * 3) as f64).unwrap();
//! let coeffs = plan.basis().forward2d(&block).unwrap();
//! let filtered = plan.basis().inverse2d(&plan.filter_block_dct(&coeffs).unwrap()).unwrap();
//! let direct = convolve(&block, &Mask::gaussian3(), PaddingMode::Replicate).unwrap();
//! assert!(filtered.max_abs_diff(&direct).unwrap() < 1e-9);
//! ```

pub mod bench;
pub mod dct;
pub mod dump;
pub mod engine;
pub mod error;
pub mod image;
pub mod linalg;
pub mod mask;
pub mod operators;
pub mod oracle;
pub mod verify;

pub use dct::DctBasis;
pub use dump::{parse_dump, write_dump, OperatorDump};
pub use engine::{
    apply_set, filter_block_dct, filter_block_spatial_roundtrip, FilterPlan, PlanCache, PlanOptions,
};
pub use error::{Error, Result};
pub use image::{filter_image, load_pgm, save_pgm, tile, GrayImage};
pub use linalg::BlockMatrix;
pub use mask::Mask;
pub use operators::{
    build_band_matrix, build_corrected_replicate_set, build_replication_correction_3x3, build_set,
    build_shift_matrix, build_spatial_operator_set, detect_row_symmetry, merge_symmetric,
    to_dct_domain, to_spatial_domain, Construction, Domain, OperatorSet, SandwichPair,
};
pub use oracle::{convolve, quantize_u8, PaddingMode};
