//! Runtime side: a [`FilterPlan`] holds a mask compiled once into DCT-domain
//! operators, after which filtering a block costs only sandwich products.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::dct::DctBasis;
use crate::error::{Error, Result};
use crate::linalg::BlockMatrix;
use crate::mask::Mask;
use crate::operators::{
    build_set, merge_symmetric, to_dct_domain, Construction, Domain, OperatorKey, OperatorSet,
};
use crate::oracle::PaddingMode;

/// Sum of `left * x * right` over every pair of `set`.
pub fn apply_set(set: &OperatorSet, x: &BlockMatrix) -> Result<BlockMatrix> {
    set.apply(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlanOptions {
    pub construction: Construction,
    /// Fold mirrored rows when the mask allows it.
    pub merge_symmetric: bool,
}

impl PlanOptions {
    /// Replicate padding of a 3x3 mask goes through the six-term border
    /// correction; other sizes use the clamped construction.
    pub fn for_padding(mask: &Mask, padding: PaddingMode) -> Self {
        let construction = match padding {
            PaddingMode::Zero => Construction::Zero,
            PaddingMode::Replicate if mask.k() == 3 => Construction::Corrected,
            PaddingMode::Replicate => Construction::Clamped,
        };
        Self {
            construction,
            merge_symmetric: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterPlan {
    dct_set: OperatorSet,
    basis: DctBasis,
    mask_k: usize,
}

impl FilterPlan {
    pub fn new(mask: &Mask, n: usize, padding: PaddingMode) -> Result<Self> {
        Self::with_options(mask, n, PlanOptions::for_padding(mask, padding))
    }

    pub fn with_options(mask: &Mask, n: usize, opts: PlanOptions) -> Result<Self> {
        let basis = DctBasis::new(n)?;
        let mut spatial = build_set(mask, n, opts.construction)?;
        if opts.merge_symmetric && mask.is_row_symmetric() {
            spatial = merge_symmetric(&spatial)?;
        }
        let dct_set = to_dct_domain(&spatial, &basis)?;
        Ok(Self {
            dct_set,
            basis,
            mask_k: mask.k(),
        })
    }

    /// Wraps an already compiled DCT-domain set, e.g. one read from a dump.
    pub fn from_dct_set(dct_set: OperatorSet) -> Result<Self> {
        if dct_set.domain != Domain::Dct {
            return Err(Error::WrongDomain("dct"));
        }
        let basis = DctBasis::new(dct_set.n)?;
        Ok(Self {
            mask_k: dct_set.k,
            dct_set,
            basis,
        })
    }

    pub fn n(&self) -> usize {
        self.basis.n()
    }

    pub fn padding(&self) -> PaddingMode {
        self.dct_set.padding()
    }

    pub fn mask_k(&self) -> usize {
        self.mask_k
    }

    pub fn dct_set(&self) -> &OperatorSet {
        &self.dct_set
    }

    pub fn basis(&self) -> &DctBasis {
        &self.basis
    }

    pub fn key(&self) -> OperatorKey {
        self.dct_set.key()
    }

    /// Filtered coefficients from block coefficients.
    pub fn filter_block_dct(&self, coeffs: &BlockMatrix) -> Result<BlockMatrix> {
        self.dct_set.apply(coeffs)
    }

    /// Forward DCT, filter in the DCT domain, inverse DCT. Unquantized.
    pub fn filter_block_spatial_roundtrip(&self, block: &BlockMatrix) -> Result<BlockMatrix> {
        let coeffs = self.basis.forward2d(block)?;
        self.basis.inverse2d(&self.filter_block_dct(&coeffs)?)
    }

    /// Test hook: adds `delta` to one entry of the first filtering pair.
    #[doc(hidden)]
    pub fn corrupt(&mut self, delta: f64) {
        if let Some(p) = self.dct_set.pairs.first_mut() {
            p.right[(0, 0)] += delta;
        }
    }
}

pub fn filter_block_dct(plan: &FilterPlan, coeffs: &BlockMatrix) -> Result<BlockMatrix> {
    plan.filter_block_dct(coeffs)
}

pub fn filter_block_spatial_roundtrip(
    plan: &FilterPlan,
    block: &BlockMatrix,
) -> Result<BlockMatrix> {
    plan.filter_block_spatial_roundtrip(block)
}

/// Shares compiled plans between callers, keyed by mask content and layout.
#[derive(Debug, Default)]
pub struct PlanCache {
    plans: Mutex<HashMap<(u64, usize, PaddingMode), Arc<FilterPlan>>>,
}

impl PlanCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, mask: &Mask, n: usize, padding: PaddingMode) -> Result<Arc<FilterPlan>> {
        let key = (mask.fingerprint(), n, padding);
        let mut plans = self.plans.lock().expect("plan cache poisoned");
        if let Some(plan) = plans.get(&key) {
            return Ok(Arc::clone(plan));
        }
        let plan = Arc::new(FilterPlan::new(mask, n, padding)?);
        plans.insert(key, Arc::clone(&plan));
        Ok(plan)
    }

    pub fn len(&self) -> usize {
        self.plans.lock().expect("plan cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{build_spatial_operator_set, SandwichPair};
    use crate::oracle::{convolve, quantize_u8};
    use proptest::prelude::*;

    fn test_block() -> BlockMatrix {
        BlockMatrix::from_fn(8, |i, j| ((i * 53 + j * 29 + i * j) % 256) as f64).unwrap()
    }

    #[test]
    fn apply_set_trivial_cases() {
        let id = BlockMatrix::identity(8).unwrap();
        let x = test_block();
        let mut set = build_spatial_operator_set(&Mask::identity(), 8, PaddingMode::Zero).unwrap();
        set.pairs = vec![SandwichPair::new(id.clone(), id).unwrap()];
        assert_eq!(apply_set(&set, &x).unwrap(), x);
        set.pairs.clear();
        assert!(apply_set(&set, &x).unwrap().is_zero());
        assert!(apply_set(&set, &BlockMatrix::zeros(4).unwrap()).is_err());
    }

    #[test]
    fn identity_plan_leaves_coefficients() {
        for p in PaddingMode::ALL {
            let plan = FilterPlan::new(&Mask::identity(), 8, p).unwrap();
            let coeffs = plan.basis().forward2d(&test_block()).unwrap();
            let out = plan.filter_block_dct(&coeffs).unwrap();
            assert!(out.max_abs_diff(&coeffs).unwrap() < 1e-12);
            let back = plan.filter_block_spatial_roundtrip(&test_block()).unwrap();
            assert!(back.max_abs_diff(&test_block()).unwrap() < 1e-10);
        }
    }

    #[test]
    fn constant_block_scales_dc_only() {
        let mask = Mask::magic3();
        let v = 3.0;
        let plan = FilterPlan::new(&mask, 8, PaddingMode::Replicate).unwrap();
        let coeffs = plan
            .basis()
            .forward2d(&BlockMatrix::filled(8, v).unwrap())
            .unwrap();
        let out = plan.filter_block_dct(&coeffs).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let expected = if (i, j) == (0, 0) {
                    8.0 * v * mask.sum()
                } else {
                    0.0
                };
                assert!(
                    (out[(i, j)] - expected).abs() < 1e-9,
                    "({i},{j}) {}",
                    out[(i, j)]
                );
            }
        }
    }

    #[test]
    fn averaging_keeps_constant() {
        let plan = FilterPlan::new(&Mask::average3(), 8, PaddingMode::Replicate).unwrap();
        let out = plan
            .filter_block_spatial_roundtrip(&BlockMatrix::filled(8, 77.0).unwrap())
            .unwrap();
        assert!(
            out.max_abs_diff(&BlockMatrix::filled(8, 77.0).unwrap())
                .unwrap()
                < 1e-10
        );
    }

    #[test]
    fn plans_pick_constructions_by_padding() {
        let g = FilterPlan::new(&Mask::gaussian3(), 8, PaddingMode::Replicate).unwrap();
        assert_eq!(g.dct_set().construction, Construction::Corrected);
        assert_eq!(g.dct_set().pairs.len(), 2);
        assert_eq!(g.dct_set().correction.len(), 3);
        let m = FilterPlan::new(&Mask::magic3(), 8, PaddingMode::Replicate).unwrap();
        assert_eq!(m.dct_set().pairs.len(), 3);
        assert_eq!(m.dct_set().correction.len(), 6);
        let g5 =
            FilterPlan::new(&Mask::gaussian(5, 1.0).unwrap(), 8, PaddingMode::Replicate).unwrap();
        assert_eq!(g5.dct_set().construction, Construction::Clamped);
        assert_eq!(g5.dct_set().pairs.len(), 3);
    }

    #[test]
    fn magic_square_matches_oracle() {
        let b = test_block();
        for p in PaddingMode::ALL {
            let plan = FilterPlan::new(&Mask::magic3(), 8, p).unwrap();
            let out = plan.filter_block_spatial_roundtrip(&b).unwrap();
            let oracle = convolve(&b, &Mask::magic3(), p).unwrap();
            assert!(out.max_abs_diff(&oracle).unwrap() < 1e-9);
            assert_eq!(quantize_u8(&out).unwrap(), quantize_u8(&oracle).unwrap());
        }
    }

    #[test]
    fn plans_are_deterministic() {
        let mask = Mask::new(3, vec![0.1, -0.7, 0.3, 0.25, 0.5, -0.5, 0.9, 0.0, -0.2]).unwrap();
        for p in PaddingMode::ALL {
            let a = FilterPlan::new(&mask, 8, p).unwrap();
            let b = FilterPlan::new(&mask, 8, p).unwrap();
            for (x, y) in a.dct_set().all_pairs().zip(b.dct_set().all_pairs()) {
                let bits =
                    |m: &BlockMatrix| m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
                assert_eq!(bits(&x.left), bits(&y.left));
                assert_eq!(bits(&x.right), bits(&y.right));
            }
        }
    }

    #[test]
    fn from_dct_set_requires_dct() {
        let spatial = build_spatial_operator_set(&Mask::magic3(), 8, PaddingMode::Zero).unwrap();
        assert_eq!(
            FilterPlan::from_dct_set(spatial).unwrap_err(),
            Error::WrongDomain("dct")
        );
        let plan = FilterPlan::new(&Mask::magic3(), 8, PaddingMode::Zero).unwrap();
        let rebuilt = FilterPlan::from_dct_set(plan.dct_set().clone()).unwrap();
        assert_eq!(rebuilt, plan);
    }

    #[test]
    fn cache_reuses_plans() {
        let cache = PlanCache::new();
        let a = cache.get(&Mask::gaussian3(), 8, PaddingMode::Zero).unwrap();
        let b = cache.get(&Mask::gaussian3(), 8, PaddingMode::Zero).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        cache
            .get(&Mask::gaussian3(), 8, PaddingMode::Replicate)
            .unwrap();
        assert_eq!(cache.len(), 2);
    }

    proptest! {
        #[test]
        fn filtering_is_linear(
            x in prop::collection::vec(0.0f64..255.0, 64),
            y in prop::collection::vec(0.0f64..255.0, 64),
            w in prop::collection::vec(-1.0f64..1.0, 9),
            a in -2.0f64..2.0,
            b in -2.0f64..2.0,
        ) {
            let x = BlockMatrix::from_row_major(8, x).unwrap();
            let y = BlockMatrix::from_row_major(8, y).unwrap();
            let mask = Mask::new(3, w).unwrap();
            for p in PaddingMode::ALL {
                let plan = FilterPlan::new(&mask, 8, p).unwrap();
                let lhs = plan.filter_block_dct(&x.scale(a).add(&y.scale(b)).unwrap()).unwrap();
                let rhs = plan.filter_block_dct(&x).unwrap().scale(a)
                    .add(&plan.filter_block_dct(&y).unwrap().scale(b)).unwrap();
                prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-9);
            }
        }
    }
}
