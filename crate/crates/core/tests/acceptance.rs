//! Exit criteria for the DCT-domain filter. Every criterion prints one
//! PASS/FAIL line; the test fails if any criterion fails.
//!
//! Run with `cargo test -p blockdct --test acceptance -- --nocapture`.

use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use blockdct::bench::operation_counts;
use blockdct::image::filter_image;
use blockdct::operators::{build_set, merge_symmetric, Construction};
use blockdct::{
    convolve, load_pgm, quantize_u8, save_pgm, BlockMatrix, DctBasis, Domain, FilterPlan,
    GrayImage, Mask, PaddingMode,
};

const N: usize = 8;
const BLOCKS: usize = 1000;
const MASKS: usize = 20;
const FLOAT_TOL: f64 = 1e-9;
const IDENTITY_TOL: f64 = 1e-12;

struct Outcome {
    id: &'static str,
    passed: bool,
    detail: String,
}

fn random_block(rng: &mut ChaCha8Rng) -> BlockMatrix {
    BlockMatrix::from_fn(N, |_, _| rng.gen_range(0..=255u32) as f64).unwrap()
}

fn random_mask(rng: &mut ChaCha8Rng, k: usize) -> Mask {
    Mask::new(k, (0..k * k).map(|_| rng.gen_range(-1.0..=1.0)).collect()).unwrap()
}

fn mismatches(a: &BlockMatrix, b: &BlockMatrix) -> usize {
    let (a, b) = (quantize_u8(a).unwrap(), quantize_u8(b).unwrap());
    a.iter().zip(&b).filter(|(x, y)| x != y).count()
}

fn unit_block(idx: usize) -> BlockMatrix {
    let mut e = BlockMatrix::zeros(N).unwrap();
    e[(idx / N, idx % N)] = 1.0;
    e
}

/// DCT path vs direct filtering for every (block, mask) pair.
struct Equivalence {
    max_err: f64,
    mismatches: usize,
    cases: usize,
    elapsed: Duration,
}

fn equivalence(masks: &[Mask], blocks: &[BlockMatrix], padding: PaddingMode) -> Equivalence {
    let start = Instant::now();
    let mut max_err = 0.0f64;
    let mut bad = 0;
    for mask in masks {
        let plan = FilterPlan::new(mask, N, padding).unwrap();
        for block in blocks {
            let got = plan.filter_block_spatial_roundtrip(block).unwrap();
            let want = convolve(block, mask, padding).unwrap();
            max_err = max_err.max(got.max_abs_diff(&want).unwrap());
            bad += mismatches(&got, &want);
        }
    }
    Equivalence {
        max_err,
        mismatches: bad,
        cases: masks.len() * blocks.len(),
        elapsed: start.elapsed(),
    }
}

fn criterion_1(rng: &mut ChaCha8Rng) -> Outcome {
    let start = Instant::now();
    let basis = DctBasis::new(N).unwrap();
    let ortho = basis
        .matrix()
        .matmul(basis.transposed())
        .unwrap()
        .max_abs_diff(&BlockMatrix::identity(N).unwrap())
        .unwrap();
    let mut max_err = 0.0f64;
    for _ in 0..BLOCKS {
        let b = BlockMatrix::from_fn(N, |_, _| rng.gen_range(0.0..=255.0)).unwrap();
        let back = basis.inverse2d(&basis.forward2d(&b).unwrap()).unwrap();
        max_err = max_err.max(back.max_abs_diff(&b).unwrap());
    }
    let elapsed = start.elapsed();
    Outcome {
        id: "1 dct round-trip",
        passed: max_err < 1e-10 && ortho < 1e-12 && elapsed < Duration::from_secs(1),
        detail: format!(
            "round-trip {max_err:.2e} (<1e-10), |CC^t-I| {ortho:.2e} (<1e-12), {elapsed:.2?} (<1s)"
        ),
    }
}

fn criterion_2(masks: &[Mask], blocks: &[BlockMatrix]) -> Outcome {
    let eq = equivalence(masks, blocks, PaddingMode::Zero);
    Outcome {
        id: "2 zero-padding exactness",
        passed: eq.max_err < FLOAT_TOL
            && eq.mismatches == 0
            && eq.elapsed < Duration::from_secs(10),
        detail: format!(
            "{} cases, max err {:.2e}, u8 mismatches {}, {:.2?} (<10s)",
            eq.cases, eq.max_err, eq.mismatches, eq.elapsed
        ),
    }
}

fn criterion_3(masks: &[Mask], blocks: &[BlockMatrix]) -> Outcome {
    let random = equivalence(masks, blocks, PaddingMode::Replicate);
    let presets = [Mask::gaussian3(), Mask::magic3()];
    let fixed = equivalence(&presets, blocks, PaddingMode::Replicate);
    let max_err = random.max_err.max(fixed.max_err);
    let bad = random.mismatches + fixed.mismatches;
    Outcome {
        id: "3 replication exactness",
        passed: max_err < FLOAT_TOL && bad == 0 && random.elapsed < Duration::from_secs(10),
        detail: format!(
            "{} random + {} preset (gaussian3, magic3) cases, max err {max_err:.2e}, u8 mismatches {bad}, {:.2?}",
            random.cases, fixed.cases, random.elapsed
        ),
    }
}

fn criterion_4(rng: &mut ChaCha8Rng) -> Outcome {
    let mut operator_err = 0.0f64;
    let mut pixel_err = 0.0f64;
    for _ in 0..100 {
        let mask = random_mask(rng, 3);
        let corrected = build_set(&mask, N, Construction::Corrected).unwrap();
        let clamped = build_set(&mask, N, Construction::Clamped).unwrap();
        // every entry of the induced linear map on n x n blocks
        for idx in 0..N * N {
            let e = unit_block(idx);
            let d = corrected
                .apply(&e)
                .unwrap()
                .max_abs_diff(&clamped.apply(&e).unwrap())
                .unwrap();
            operator_err = operator_err.max(d);
        }
        let b = random_block(rng);
        let d = corrected
            .apply(&b)
            .unwrap()
            .max_abs_diff(&clamped.apply(&b).unwrap())
            .unwrap();
        pixel_err = pixel_err.max(d);
    }
    Outcome {
        id: "4 six-term decomposition",
        passed: operator_err < IDENTITY_TOL && pixel_err < IDENTITY_TOL,
        detail: format!(
            "100 masks, operator entries {operator_err:.2e}, pixel blocks {pixel_err:.2e} (<1e-12)"
        ),
    }
}

fn criterion_5(rng: &mut ChaCha8Rng) -> Outcome {
    let mut max_err = 0.0f64;
    let mut pair_counts_ok = true;
    for _ in 0..100 {
        let mut w = [0.0; 9];
        for c in 0..3 {
            w[c] = rng.gen_range(-1.0..=1.0);
            w[6 + c] = w[c];
            w[3 + c] = rng.gen_range(-1.0..=1.0);
        }
        let mask = Mask::new(3, w.to_vec()).unwrap();
        for construction in [Construction::Zero, Construction::Corrected] {
            let unmerged = build_set(&mask, N, construction).unwrap();
            let merged = merge_symmetric(&unmerged).unwrap();
            pair_counts_ok &= unmerged.pairs.len() == 3 && merged.pairs.len() == 2;
            let b = random_block(rng);
            let d = merged
                .apply(&b)
                .unwrap()
                .max_abs_diff(&unmerged.apply(&b).unwrap())
                .unwrap();
            max_err = max_err.max(d);
        }
    }
    let g = operation_counts(&Mask::gaussian3(), N).unwrap();
    let m = operation_counts(&Mask::magic3(), N).unwrap();
    let groups = (g.replication_groups_merged, m.replication_groups_merged);
    Outcome {
        id: "5 symmetric merge",
        passed: max_err < IDENTITY_TOL && pair_counts_ok && groups == (Some(3), Some(6)),
        detail: format!(
            "100 masks, merged vs unmerged {max_err:.2e} (<1e-12), 3 -> 2 pairs {pair_counts_ok}, \
             replication groups gaussian3 {:?} vs magic3 {:?}",
            groups.0, groups.1
        ),
    }
}

fn criterion_6(rng: &mut ChaCha8Rng, blocks: &[BlockMatrix]) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for k in [1, 5, 7] {
        let masks: Vec<Mask> = (0..MASKS).map(|_| random_mask(rng, k)).collect();
        for padding in PaddingMode::ALL {
            let eq = equivalence(&masks, blocks, padding);
            passed &= eq.max_err < FLOAT_TOL
                && eq.mismatches == 0
                && eq.elapsed < Duration::from_secs(10);
            parts.push(format!(
                "k{k}/{padding} {:.1e}/{}",
                eq.max_err, eq.mismatches
            ));
        }
    }
    Outcome {
        id: "6 generalized mask sizes",
        passed,
        detail: format!("err/mismatch: {}", parts.join(", ")),
    }
}

fn criterion_7() -> Outcome {
    let gradient = GrayImage::from_fn(512, 512, |x, y| ((x + 2 * y) / 6 % 256) as u8).unwrap();
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/camera_512.pgm");
    let camera = load_pgm(&std::fs::read(data).unwrap()).unwrap();
    let mut passed = true;
    let mut slowest = Duration::ZERO;
    let mut differing = 0;
    for (name, image) in [("gradient", &gradient), ("camera", &camera)] {
        assert_eq!((image.width(), image.height()), (512, 512), "{name}");
        let start = Instant::now();
        for mask in [Mask::gaussian3(), Mask::magic3()] {
            for padding in PaddingMode::ALL {
                let dct = save_pgm(&filter_image(image, &mask, padding, Domain::Dct, N).unwrap());
                let spatial =
                    save_pgm(&filter_image(image, &mask, padding, Domain::Spatial, N).unwrap());
                if dct != spatial {
                    differing += 1;
                    passed = false;
                }
            }
        }
        let per_image = start.elapsed();
        slowest = slowest.max(per_image);
        passed &= per_image < Duration::from_secs(5);
    }
    Outcome {
        id: "7 whole-image path equivalence",
        passed,
        detail: format!(
            "gradient + camera 512x512, gaussian3/magic3 x zero/replicate, differing payloads {differing}, \
             slowest image {slowest:.2?} for all 8 runs (<5s)"
        ),
    }
}

#[test]
fn acceptance_criteria() {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let blocks: Vec<BlockMatrix> = (0..BLOCKS).map(|_| random_block(&mut rng)).collect();
    let masks3: Vec<Mask> = (0..MASKS).map(|_| random_mask(&mut rng, 3)).collect();

    let outcomes = vec![
        criterion_1(&mut rng),
        criterion_2(&masks3, &blocks),
        criterion_3(&masks3, &blocks),
        criterion_4(&mut rng),
        criterion_5(&mut rng),
        criterion_6(&mut rng, &blocks),
        criterion_7(),
    ];

    for o in &outcomes {
        println!(
            "[{}] {:<32} {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.id,
            o.detail
        );
    }
    let failed: Vec<_> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| o.id)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
