//! Plain-text operator dumps.
//!
//! ```text
//! blockdct-operators 1
//! set
//! n 8
//! k 3
//! construction corrected
//! padding replicate
//! domain dct
//! symmetric_merged true
//! fingerprint 5e1f0c0d9a2b7c44
//! mask
//! <k rows of weights>
//! pairs 2
//! correction 3
//! pair filter 0
//! left
//! <n rows>
//! right
//! <n rows>
//! ...
//! end
//! ```
//!
//! Reals are written with 17 significant digits, which round-trips every
//! `f64` exactly, so a parsed set is bitwise equal to the one written.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::BlockMatrix;
use crate::mask::Mask;
use crate::operators::{Construction, Domain, OperatorSet, SandwichPair};

const MAGIC: &str = "blockdct-operators 1";

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorDump {
    pub mask: Mask,
    pub set: OperatorSet,
}

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_rows(out: &mut String, rows: impl Iterator<Item = Vec<f64>>) {
    for row in rows {
        let line: Vec<String> = row.into_iter().map(real).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
}

fn write_matrix(out: &mut String, m: &BlockMatrix) {
    write_rows(out, (0..m.n()).map(|i| m.row(i).to_vec()));
}

pub fn write_dump(dumps: &[OperatorDump]) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    for OperatorDump { mask, set } in dumps {
        let _ = writeln!(out, "set");
        let _ = writeln!(out, "n {}", set.n);
        let _ = writeln!(out, "k {}", set.k);
        let _ = writeln!(out, "construction {}", set.construction.as_str());
        let _ = writeln!(out, "padding {}", set.padding());
        let _ = writeln!(out, "domain {}", set.domain);
        let _ = writeln!(out, "symmetric_merged {}", set.symmetric_merged);
        let _ = writeln!(out, "fingerprint {:016x}", set.mask_fingerprint);
        out.push_str("mask\n");
        write_rows(&mut out, (0..mask.k()).map(|r| mask.row(r).to_vec()));
        let _ = writeln!(out, "pairs {}", set.pairs.len());
        let _ = writeln!(out, "correction {}", set.correction.len());
        let tagged = set
            .pairs
            .iter()
            .enumerate()
            .map(|(i, p)| ("filter", i, p))
            .chain(
                set.correction
                    .iter()
                    .enumerate()
                    .map(|(i, p)| ("correction", i, p)),
            );
        for (tag, i, pair) in tagged {
            let _ = writeln!(out, "pair {tag} {i}");
            out.push_str("left\n");
            write_matrix(&mut out, &pair.left);
            out.push_str("right\n");
            write_matrix(&mut out, &pair.right);
        }
        out.push_str("end\n");
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
            line: 0,
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::DumpParse {
            line: self.line,
            msg: msg.into(),
        }
    }

    fn next(&mut self) -> Option<&'a str> {
        for (idx, l) in self.inner.by_ref() {
            let l = l.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            self.line = idx + 1;
            return Some(l);
        }
        None
    }

    fn expect_line(&mut self) -> Result<&'a str> {
        self.next().ok_or_else(|| Error::DumpParse {
            line: self.line + 1,
            msg: "unexpected end of file".into(),
        })
    }

    fn keyword(&mut self, word: &str) -> Result<()> {
        let l = self.expect_line()?;
        if l != word {
            return Err(self.err(format!("expected {word:?}, found {l:?}")));
        }
        Ok(())
    }

    fn field(&mut self, key: &str) -> Result<&'a str> {
        let l = self.expect_line()?;
        match l.split_once(' ') {
            Some((k, v)) if k == key => Ok(v.trim()),
            _ => Err(self.err(format!("expected field {key:?}, found {l:?}"))),
        }
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let v = self.field(key)?;
        v.parse()
            .map_err(|_| self.err(format!("bad value {v:?} for {key}")))
    }

    fn reals(&mut self, count: usize) -> Result<Vec<f64>> {
        let l = self.expect_line()?;
        let vals = l
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| self.err(format!("bad real {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if vals.len() != count {
            return Err(self.err(format!("expected {count} values, found {}", vals.len())));
        }
        Ok(vals)
    }

    fn matrix(&mut self, n: usize) -> Result<BlockMatrix> {
        let mut data = Vec::with_capacity(n * n);
        for _ in 0..n {
            data.extend(self.reals(n)?);
        }
        BlockMatrix::from_row_major(n, data).map_err(|e| self.err(e.to_string()))
    }
}

pub fn parse_dump(text: &str) -> Result<Vec<OperatorDump>> {
    let mut lines = Lines::new(text);
    match lines.next() {
        Some(MAGIC) => {}
        other => return Err(lines.err(format!("missing header, found {other:?}"))),
    }
    let mut dumps = Vec::new();
    while let Some(l) = lines.next() {
        if l != "set" {
            return Err(lines.err(format!("expected \"set\", found {l:?}")));
        }
        dumps.push(parse_set(&mut lines)?);
    }
    Ok(dumps)
}

fn parse_set(lines: &mut Lines<'_>) -> Result<OperatorDump> {
    let n: usize = lines.parsed("n")?;
    let k: usize = lines.parsed("k")?;
    let construction: Construction = lines.parsed("construction")?;
    let padding = lines.field("padding")?;
    if padding != construction.padding().as_str() {
        return Err(lines.err(format!("padding {padding:?} contradicts construction")));
    }
    let domain: Domain = lines.parsed("domain")?;
    let symmetric_merged: bool = lines.parsed("symmetric_merged")?;
    let fp = lines.field("fingerprint")?;
    let mask_fingerprint =
        u64::from_str_radix(fp, 16).map_err(|_| lines.err(format!("bad fingerprint {fp:?}")))?;
    lines.keyword("mask")?;
    let mut weights = Vec::with_capacity(k * k);
    for _ in 0..k {
        weights.extend(lines.reals(k)?);
    }
    let mask = Mask::new(k, weights).map_err(|e| lines.err(e.to_string()))?;
    if mask.fingerprint() != mask_fingerprint {
        return Err(lines.err("fingerprint does not match mask weights"));
    }
    let pair_count: usize = lines.parsed("pairs")?;
    let correction_count: usize = lines.parsed("correction")?;
    let mut read_pairs = |tag: &str, count: usize| -> Result<Vec<SandwichPair>> {
        (0..count)
            .map(|i| {
                let header = lines.expect_line()?;
                if header != format!("pair {tag} {i}") {
                    return Err(lines.err(format!("expected pair {tag} {i}, found {header:?}")));
                }
                lines.keyword("left")?;
                let left = lines.matrix(n)?;
                lines.keyword("right")?;
                let right = lines.matrix(n)?;
                Ok(SandwichPair { left, right })
            })
            .collect()
    };
    let pairs = read_pairs("filter", pair_count)?;
    let correction = read_pairs("correction", correction_count)?;
    lines.keyword("end")?;
    Ok(OperatorDump {
        mask,
        set: OperatorSet {
            pairs,
            correction,
            n,
            k,
            construction,
            domain,
            symmetric_merged,
            mask_fingerprint,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dct::DctBasis;
    use crate::operators::{build_set, merge_symmetric, to_dct_domain};
    use proptest::prelude::*;

    fn dumps_for(mask: &Mask) -> Vec<OperatorDump> {
        let basis = DctBasis::new(8).unwrap();
        let construction = if mask.k() == 3 {
            Construction::Corrected
        } else {
            Construction::Clamped
        };
        let mut spatial = build_set(mask, 8, construction).unwrap();
        if mask.is_row_symmetric() {
            spatial = merge_symmetric(&spatial).unwrap();
        }
        let dct = to_dct_domain(&spatial, &basis).unwrap();
        vec![
            OperatorDump {
                mask: mask.clone(),
                set: spatial,
            },
            OperatorDump {
                mask: mask.clone(),
                set: dct,
            },
        ]
    }

    #[test]
    fn round_trip_is_bitwise() {
        let dumps = dumps_for(&Mask::gaussian3());
        let text = write_dump(&dumps);
        let parsed = parse_dump(&text).unwrap();
        assert_eq!(parsed, dumps);
        for (a, b) in parsed.iter().zip(&dumps) {
            for (p, q) in a.set.all_pairs().zip(b.set.all_pairs()) {
                let bits =
                    |m: &BlockMatrix| m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
                assert_eq!(bits(&p.left), bits(&q.left));
                assert_eq!(bits(&p.right), bits(&q.right));
            }
        }
    }

    #[test]
    fn uses_seventeen_significant_digits() {
        assert_eq!(real(0.1), "1.0000000000000001e-1");
        assert_eq!(real(1.0), "1.0000000000000000e0");
        let text = write_dump(&dumps_for(&Mask::identity())[..1]);
        assert!(text.contains("\nleft\n1.0000000000000000e0 0.0000000000000000e0 "));
    }

    #[test]
    fn rejects_corruption() {
        let text = write_dump(&dumps_for(&Mask::magic3()));
        assert!(parse_dump("nonsense").is_err());
        let tampered = text.replacen("construction corrected", "construction bogus", 1);
        assert!(matches!(
            parse_dump(&tampered),
            Err(Error::DumpParse { .. })
        ));
        let tampered = text.replacen("fingerprint ", "fingerprint 1", 1);
        assert!(parse_dump(&tampered).is_err());
        let truncated = &text[..text.len() / 2];
        assert!(parse_dump(truncated).is_err());
        let padding_lie = text.replacen("padding replicate", "padding zero", 1);
        assert!(parse_dump(&padding_lie).is_err());
    }

    proptest! {
        #[test]
        fn random_masks_round_trip(w in prop::collection::vec(-1e3f64..1e3, 9)) {
            let mask = Mask::new(3, w).unwrap();
            let dumps = vec![OperatorDump {
                mask: mask.clone(),
                set: to_dct_domain(&build_set(&mask, 8, Construction::Corrected).unwrap(), &DctBasis::new(8).unwrap()).unwrap(),
            }];
            prop_assert_eq!(parse_dump(&write_dump(&dumps)).unwrap(), dumps);
        }
    }
}
