//! Randomized equivalence checks between the DCT-domain operators and the
//! direct spatial filter. Backs the `verify` command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{FilterPlan, PlanOptions};
use crate::error::Result;
use crate::linalg::BlockMatrix;
use crate::mask::Mask;
use crate::operators::{build_set, merge_symmetric, Construction};
use crate::oracle::{convolve, quantize_u8, PaddingMode};

/// Float error bound every suite must stay under.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub trials: usize,
    pub seed: u64,
    pub n: usize,
    /// Perturb one DCT-domain operator entry to prove the harness can fail.
    pub corrupt: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            seed: 42,
            n: 8,
            corrupt: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: String,
    pub cases: usize,
    pub max_float_error: f64,
    pub u8_mismatches: usize,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.max_float_error < FLOAT_TOLERANCE && self.u8_mismatches == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }
}

pub fn random_block(rng: &mut impl Rng, n: usize) -> BlockMatrix {
    BlockMatrix::from_fn(n, |_, _| rng.gen_range(0..=255u32) as f64).expect("n >= 1")
}

pub fn random_mask(rng: &mut impl Rng, k: usize) -> Mask {
    Mask::new(k, (0..k * k).map(|_| rng.gen_range(-1.0..=1.0)).collect()).expect("odd k")
}

/// Random mask whose row `r` equals row `k - 1 - r`.
pub fn random_row_symmetric_mask(rng: &mut impl Rng, k: usize) -> Mask {
    let mut w = vec![0.0; k * k];
    for r in 0..=k / 2 {
        for c in 0..k {
            let v = rng.gen_range(-1.0..=1.0);
            w[r * k + c] = v;
            w[(k - 1 - r) * k + c] = v;
        }
    }
    Mask::new(k, w).expect("odd k")
}

#[derive(Default)]
struct Tally {
    cases: usize,
    max_err: f64,
    mismatches: usize,
}

impl Tally {
    fn record(&mut self, got: &BlockMatrix, want: &BlockMatrix, quantized: bool) -> Result<()> {
        self.cases += 1;
        self.max_err = self.max_err.max(got.max_abs_diff(want)?);
        if quantized {
            let (a, b) = (quantize_u8(got)?, quantize_u8(want)?);
            self.mismatches += a.iter().zip(&b).filter(|(x, y)| x != y).count();
        }
        Ok(())
    }

    fn finish(self, name: impl Into<String>) -> SuiteResult {
        SuiteResult {
            name: name.into(),
            cases: self.cases,
            max_float_error: self.max_err,
            u8_mismatches: self.mismatches,
        }
    }
}

fn plan(mask: &Mask, n: usize, padding: PaddingMode, corrupt: bool) -> Result<FilterPlan> {
    let mut plan = FilterPlan::new(mask, n, padding)?;
    if corrupt {
        plan.corrupt(0.5);
    }
    Ok(plan)
}

/// DCT path vs oracle over `trials` random (block, mask) cases.
fn equivalence_suite(
    rng: &mut ChaCha8Rng,
    cfg: &VerifyConfig,
    k: usize,
    padding: PaddingMode,
) -> Result<SuiteResult> {
    let mut tally = Tally::default();
    for _ in 0..cfg.trials {
        let mask = random_mask(rng, k);
        let block = random_block(rng, cfg.n);
        let got =
            plan(&mask, cfg.n, padding, cfg.corrupt)?.filter_block_spatial_roundtrip(&block)?;
        tally.record(&got, &convolve(&block, &mask, padding)?, true)?;
    }
    Ok(tally.finish(format!("{padding}-k{k}")))
}

fn preset_suite(
    rng: &mut ChaCha8Rng,
    cfg: &VerifyConfig,
    name: &str,
    padding: PaddingMode,
) -> Result<SuiteResult> {
    let mask = Mask::preset(name).expect("known preset");
    let plan = plan(&mask, cfg.n, padding, cfg.corrupt)?;
    let mut tally = Tally::default();
    for _ in 0..cfg.trials {
        let block = random_block(rng, cfg.n);
        let got = plan.filter_block_spatial_roundtrip(&block)?;
        tally.record(&got, &convolve(&block, &mask, padding)?, true)?;
    }
    Ok(tally.finish(format!("{name}-{padding}")))
}

fn merge_suite(rng: &mut ChaCha8Rng, cfg: &VerifyConfig) -> Result<SuiteResult> {
    let mut tally = Tally::default();
    for _ in 0..cfg.trials {
        let mask = random_row_symmetric_mask(rng, 3);
        let block = random_block(rng, cfg.n);
        for c in [Construction::Zero, Construction::Corrected] {
            let unmerged = build_set(&mask, cfg.n, c)?;
            let merged = merge_symmetric(&unmerged)?;
            tally.record(&merged.apply(&block)?, &unmerged.apply(&block)?, true)?;
        }
        let opts = PlanOptions {
            construction: Construction::Corrected,
            merge_symmetric: true,
        };
        let mut merged_plan = FilterPlan::with_options(&mask, cfg.n, opts)?;
        if cfg.corrupt {
            merged_plan.corrupt(0.5);
        }
        let got = merged_plan.filter_block_spatial_roundtrip(&block)?;
        tally.record(
            &got,
            &convolve(&block, &mask, PaddingMode::Replicate)?,
            true,
        )?;
    }
    Ok(tally.finish("symmetric-merge"))
}

/// Zero set plus six correction terms vs the clamped construction.
fn six_term_suite(rng: &mut ChaCha8Rng, cfg: &VerifyConfig) -> Result<SuiteResult> {
    let mut tally = Tally::default();
    for _ in 0..cfg.trials {
        let mask = random_mask(rng, 3);
        let block = random_block(rng, cfg.n);
        let corrected = build_set(&mask, cfg.n, Construction::Corrected)?;
        let clamped = build_set(&mask, cfg.n, Construction::Clamped)?;
        tally.record(&corrected.apply(&block)?, &clamped.apply(&block)?, true)?;
    }
    Ok(tally.finish("six-term-identity"))
}

pub fn run(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut suites = Vec::new();
    for padding in PaddingMode::ALL {
        for k in [1, 3, 5, 7] {
            if k <= cfg.n {
                suites.push(equivalence_suite(&mut rng, cfg, k, padding)?);
            }
        }
    }
    if cfg.n >= 3 {
        for name in ["gaussian3", "magic3"] {
            for padding in PaddingMode::ALL {
                suites.push(preset_suite(&mut rng, cfg, name, padding)?);
            }
        }
        suites.push(merge_suite(&mut rng, cfg)?);
        suites.push(six_term_suite(&mut rng, cfg)?);
    }
    Ok(VerifyReport { suites })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes() {
        let report = run(&VerifyConfig {
            trials: 5,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(report.suites.len(), 14);
        assert!(report.passed(), "{report:#?}");
    }

    #[test]
    fn corruption_is_detected() {
        let report = run(&VerifyConfig {
            trials: 3,
            corrupt: true,
            ..Default::default()
        })
        .unwrap();
        assert!(!report.passed());
    }

    #[test]
    fn seeded_runs_repeat() {
        let cfg = VerifyConfig {
            trials: 4,
            seed: 7,
            ..Default::default()
        };
        assert_eq!(run(&cfg).unwrap(), run(&cfg).unwrap());
    }

    #[test]
    fn symmetric_generator() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in [1, 3, 5, 7] {
            assert!(random_row_symmetric_mask(&mut rng, k).is_row_symmetric());
        }
    }
}
