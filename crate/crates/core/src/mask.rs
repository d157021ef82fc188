//! Square filter masks and the named presets.

use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// A `k x k` filter with odd `k`, weights stored row-major.
///
/// Filtering is a sliding dot product:
/// `out(i, j) = sum_{r,c} w[r][c] * in(i + r - h, j + c - h)` with `h = (k - 1) / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    k: usize,
    w: Vec<f64>,
}

impl Mask {
    pub fn new(k: usize, weights: Vec<f64>) -> Result<Self> {
        if k == 0 || k.is_multiple_of(2) {
            return Err(Error::InvalidMask(format!("side {k} is not odd")));
        }
        if weights.len() != k * k {
            return Err(Error::InvalidMask(format!(
                "expected {} weights for a {k}x{k} mask, got {}",
                k * k,
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidMask("non-finite weight".into()));
        }
        Ok(Self { k, w: weights })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let k = rows.len();
        let mut w = Vec::with_capacity(k * k);
        for row in rows {
            if row.as_ref().len() != k {
                return Err(Error::InvalidMask("mask must be square".into()));
            }
            w.extend_from_slice(row.as_ref());
        }
        Self::new(k, w)
    }

    pub fn identity() -> Self {
        Self { k: 1, w: vec![1.0] }
    }

    /// Normalized 3x3 Gaussian with sigma = 1.
    pub fn gaussian3() -> Self {
        Self::gaussian(3, 1.0).expect("valid preset")
    }

    pub fn gaussian(k: usize, sigma: f64) -> Result<Self> {
        if k.is_multiple_of(2) || sigma.is_nan() || sigma <= 0.0 {
            return Err(Error::InvalidMask(format!("gaussian k={k} sigma={sigma}")));
        }
        let h = (k / 2) as f64;
        let mut w = Vec::with_capacity(k * k);
        for r in 0..k {
            for c in 0..k {
                let (y, x) = (r as f64 - h, c as f64 - h);
                w.push((-(x * x + y * y) / (2.0 * sigma * sigma)).exp());
            }
        }
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= total);
        Self::new(k, w)
    }

    pub fn average3() -> Self {
        Self {
            k: 3,
            w: vec![1.0 / 9.0; 9],
        }
    }

    /// Magic square of order 3.
    pub fn magic3() -> Self {
        Self {
            k: 3,
            w: vec![8.0, 1.0, 6.0, 3.0, 5.0, 7.0, 4.0, 9.0, 2.0],
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "gaussian3" => Some(Self::gaussian3()),
            "average3" => Some(Self::average3()),
            "identity" => Some(Self::identity()),
            "magic3" => Some(Self::magic3()),
            _ => None,
        }
    }

    pub const PRESETS: [&'static str; 4] = ["gaussian3", "average3", "identity", "magic3"];

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    /// Half-width `(k - 1) / 2`.
    #[inline]
    pub fn radius(&self) -> usize {
        self.k / 2
    }

    #[inline]
    pub fn weight(&self, r: usize, c: usize) -> f64 {
        self.w[r * self.k + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.w[r * self.k..(r + 1) * self.k]
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn sum(&self) -> f64 {
        self.w.iter().sum()
    }

    /// True when row `r` equals row `k - 1 - r` for every `r`.
    pub fn is_row_symmetric(&self) -> bool {
        (0..self.k / 2).all(|r| self.row(r) == self.row(self.k - 1 - r))
    }

    pub fn is_column_symmetric(&self) -> bool {
        (0..self.k).all(|r| {
            let row = self.row(r);
            (0..self.k / 2).all(|c| row[c] == row[self.k - 1 - c])
        })
    }

    /// SHA-256 over the side length and the exact weight bits; truncated to 64 bits.
    pub fn fingerprint(&self) -> u64 {
        let mut hasher = Sha256::new();
        hasher.update((self.k as u64).to_le_bytes());
        for w in &self.w {
            hasher.update(w.to_bits().to_le_bytes());
        }
        let digest = hasher.finalize();
        u64::from_be_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
    }
}

/// Parses rows separated by `;` or newlines, weights by commas or whitespace,
/// e.g. `"1 2 1; 2 4 2; 1 2 1"`.
impl FromStr for Mask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for line in s.split([';', '\n']) {
            let line = line.split('#').next().unwrap_or("");
            let row = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::InvalidMask(format!("bad weight {t:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if !row.is_empty() {
                rows.push(row);
            }
        }
        if rows.is_empty() {
            return Err(Error::InvalidMask("no weights given".into()));
        }
        Self::from_rows(&rows)
    }
}

impl fmt::Display for Mask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.k {
            let row: Vec<String> = self.row(r).iter().map(|w| format!("{w}")).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}
