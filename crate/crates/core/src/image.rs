//! Grayscale images, PGM I/O and block-wise filtering of whole images.

use rayon::prelude::*;

use crate::engine::FilterPlan;
use crate::error::{Error, Result};
use crate::linalg::BlockMatrix;
use crate::mask::Mask;
use crate::operators::Domain;
use crate::oracle::{convolve, quantize_sample, PaddingMode};

pub const DEFAULT_BLOCK: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    samples: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, samples: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::MalformedHeader(format!(
                "empty image {width}x{height}"
            )));
        }
        if samples.len() != width * height {
            return Err(Error::BadEntryCount {
                expected: width * height,
                actual: samples.len(),
            });
        }
        Ok(Self {
            width,
            height,
            samples,
        })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> u8) -> Result<Self> {
        let samples = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::new(width, height, samples)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.samples[y * self.width + x]
    }

    /// Crops the rectangle at `(x, y)` of size `w x h`.
    pub fn crop(&self, x: usize, y: usize, w: usize, h: usize) -> Result<Self> {
        if x + w > self.width || y + h > self.height {
            return Err(Error::DimensionMismatch {
                left: self.width.max(self.height),
                right: (x + w).max(y + h),
            });
        }
        Self::from_fn(w, h, |cx, cy| self.get(x + cx, y + cy))
    }
}

// ---------------------------------------------------------------------------
// PGM

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderReader<'_> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn token(&mut self, what: &str) -> Result<&[u8]> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            if self.bytes[self.pos] == b'#' {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::MalformedHeader(format!("missing {what}")));
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        let tok = self.token(what)?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| {
                Error::MalformedHeader(format!("bad {what} {:?}", String::from_utf8_lossy(tok)))
            })
    }
}

/// Reads binary (P5) or ASCII (P2) PGM with maxval 255.
pub fn load_pgm(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.len() < 2 {
        return Err(Error::MalformedHeader("file too short".into()));
    }
    let magic = &bytes[..2];
    let binary = match magic {
        b"P5" => true,
        b"P2" => false,
        _ => {
            return Err(Error::UnsupportedFormat(
                String::from_utf8_lossy(magic).into_owned(),
            ))
        }
    };
    let mut rd = HeaderReader { bytes, pos: 2 };
    let width = rd.number("width")? as usize;
    let height = rd.number("height")? as usize;
    let maxval = rd.number("maxval")?;
    if maxval != 255 {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader(format!(
            "empty image {width}x{height}"
        )));
    }
    let expected = width * height;
    let samples = if binary {
        // exactly one whitespace byte separates the header from the raster
        match bytes.get(rd.pos) {
            Some(c) if c.is_ascii_whitespace() => {}
            _ => {
                return Err(Error::MalformedHeader(
                    "missing separator after maxval".into(),
                ))
            }
        }
        let raster = &bytes[rd.pos + 1..];
        if raster.len() < expected {
            return Err(Error::TruncatedData {
                expected,
                found: raster.len(),
            });
        }
        raster[..expected].to_vec()
    } else {
        let mut samples = Vec::with_capacity(expected);
        for found in 0..expected {
            rd.skip_space_and_comments();
            if rd.pos >= bytes.len() {
                return Err(Error::TruncatedData { expected, found });
            }
            let v = rd.number("sample")?;
            if v > 255 {
                return Err(Error::SampleOutOfRange(v));
            }
            samples.push(v as u8);
        }
        samples
    };
    GrayImage::new(width, height, samples)
}

/// Writes binary P5 with maxval 255.
pub fn save_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width, image.height).into_bytes();
    out.extend_from_slice(&image.samples);
    out
}

pub fn save_pgm_ascii(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P2\n{} {}\n255\n", image.width, image.height);
    for row in image.samples.chunks(image.width) {
        let line: Vec<String> = row.iter().map(u8::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out.into_bytes()
}

// ---------------------------------------------------------------------------
// Tiling

/// Top-left corner of a block, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockPos {
    pub x: usize,
    pub y: usize,
}

fn padded_dims(image: &GrayImage, n: usize) -> (usize, usize) {
    (image.width.div_ceil(n) * n, image.height.div_ceil(n) * n)
}

/// Cuts the image into `n x n` blocks in row-major block order, padding the
/// right and bottom edges to a multiple of `n` by edge replication.
pub fn tile(image: &GrayImage, n: usize) -> Result<Vec<(BlockPos, BlockMatrix)>> {
    if n < 2 {
        return Err(Error::InvalidBlockSize(n));
    }
    let (pw, ph) = padded_dims(image, n);
    let mut blocks = Vec::with_capacity((pw / n) * (ph / n));
    for by in (0..ph).step_by(n) {
        for bx in (0..pw).step_by(n) {
            let block = BlockMatrix::from_fn(n, |i, j| {
                let x = (bx + j).min(image.width - 1);
                let y = (by + i).min(image.height - 1);
                image.get(x, y) as f64
            })?;
            blocks.push((BlockPos { x: bx, y: by }, block));
        }
    }
    Ok(blocks)
}

/// Reassembles quantized blocks and crops to `width x height`.
pub fn untile(
    width: usize,
    height: usize,
    n: usize,
    blocks: &[(BlockPos, Vec<u8>)],
) -> Result<GrayImage> {
    let mut samples = vec![0u8; width * height];
    for (pos, data) in blocks {
        if data.len() != n * n {
            return Err(Error::BadEntryCount {
                expected: n * n,
                actual: data.len(),
            });
        }
        for i in 0..n {
            let y = pos.y + i;
            if y >= height {
                break;
            }
            for j in 0..n {
                let x = pos.x + j;
                if x >= width {
                    break;
                }
                samples[y * width + x] = data[i * n + j];
            }
        }
    }
    GrayImage::new(width, height, samples)
}

fn quantize(block: &BlockMatrix) -> Vec<u8> {
    block
        .as_slice()
        .iter()
        .map(|&v| quantize_sample(v))
        .collect()
}

/// Filters every block independently, then quantizes and reassembles.
///
/// `Domain::Dct` compiles one plan and filters DCT coefficients;
/// `Domain::Spatial` runs the direct convolution on each block.
pub fn filter_image(
    image: &GrayImage,
    mask: &Mask,
    padding: PaddingMode,
    path: Domain,
    n: usize,
) -> Result<GrayImage> {
    let blocks = tile(image, n)?;
    let filtered: Vec<(BlockPos, Vec<u8>)> = match path {
        Domain::Dct => {
            let plan = FilterPlan::new(mask, n, padding)?;
            filter_image_with_plan_blocks(&plan, blocks)?
        }
        Domain::Spatial => {
            if mask.k() > n {
                return Err(Error::MaskTooLarge { k: mask.k(), n });
            }
            blocks
                .into_par_iter()
                .map(|(pos, b)| Ok((pos, quantize(&convolve(&b, mask, padding)?))))
                .collect::<Result<_>>()?
        }
    };
    untile(image.width, image.height, n, &filtered)
}

/// DCT-path filtering with a precompiled plan.
pub fn filter_image_with_plan(image: &GrayImage, plan: &FilterPlan) -> Result<GrayImage> {
    let blocks = tile(image, plan.n())?;
    let filtered = filter_image_with_plan_blocks(plan, blocks)?;
    untile(image.width, image.height, plan.n(), &filtered)
}

fn filter_image_with_plan_blocks(
    plan: &FilterPlan,
    blocks: Vec<(BlockPos, BlockMatrix)>,
) -> Result<Vec<(BlockPos, Vec<u8>)>> {
    blocks
        .into_par_iter()
        .map(|(pos, b)| Ok((pos, quantize(&plan.filter_block_spatial_roundtrip(&b)?))))
        .collect()
}
