//! Microscopic last-passage times on the discretised environment.
//!
//! Site `(i, j)` carries the weight `tau = E(i, j) / c(i/n, j/n)` where
//! `E(i, j)` is the Exp(1) draw of [`ExpSource`]. `i` is the horizontal and
//! `j` the vertical lattice coordinate. Last-passage values include the
//! weight of the start site.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::field::SpeedField;
use crate::rng::ExpSource;

/// Lattice site `(i, j)`.
pub type Site = (u64, u64);

/// Default cap on the memory used to store backtracking information.
pub const DEFAULT_MEMORY_BUDGET: usize = 1 << 30;

/// Field, scale and seed; together they fix every lattice weight.
#[derive(Clone, Debug)]
pub struct EnvironmentSpec {
    pub field: SpeedField,
    pub n: u32,
    pub seed: u64,
    source: ExpSource,
}

/// A last-passage value, optionally with a maximal path.
#[derive(Clone, Debug, PartialEq)]
pub struct PassageResult {
    pub value: f64,
    pub path: Option<Vec<Site>>,
    pub start: Site,
    pub target: Site,
}

impl PassageResult {
    /// Checks the endpoints and that every step is `(1, 0)` or `(0, 1)`.
    pub fn path_is_valid(&self) -> bool {
        let Some(path) = &self.path else {
            return true;
        };
        path.first() == Some(&self.start)
            && path.last() == Some(&self.target)
            && path.windows(2).all(|w| {
                let (a, b) = (w[0], w[1]);
                (b.0 == a.0 + 1 && b.1 == a.1) || (b.0 == a.0 && b.1 == a.1 + 1)
            })
    }
}

impl EnvironmentSpec {
    pub fn new(field: SpeedField, n: u32, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("scale n must be positive"));
        }
        Ok(EnvironmentSpec {
            field,
            n,
            seed,
            source: ExpSource::new(seed),
        })
    }

    fn macro_coord(&self, i: u64) -> f64 {
        i as f64 / f64::from(self.n)
    }

    fn check_site(&self, (i, j): Site) -> Result<()> {
        let (x, y) = (self.macro_coord(i), self.macro_coord(j));
        if !self.field.bbox().contains(x, y) {
            return Err(Error::domain(format!(
                "lattice site ({i}, {j}) maps to ({x}, {y}) outside the field bbox"
            )));
        }
        Ok(())
    }

    /// Weight `tau(i, j)`.
    pub fn weight(&self, i: u64, j: u64) -> Result<f64> {
        self.check_site((i, j))?;
        Ok(self.source.exp1(i, j) / self.rate(i, j))
    }

    fn rate(&self, i: u64, j: u64) -> f64 {
        self.field
            .rate_unchecked(self.macro_coord(i), self.macro_coord(j))
    }

    /// Weights of row `j` for columns `i0 .. i0 + out.len()`.
    fn fill_weights(&self, j: u64, i0: u64, out: &mut [f64]) {
        self.source.fill_row(j, i0, out);
        let y = self.macro_coord(j);
        for (k, w) in out.iter_mut().enumerate() {
            *w /= self.field.rate_unchecked(self.macro_coord(i0 + k as u64), y);
        }
    }

    fn check_rect(&self, start: Site, target: Site) -> Result<()> {
        if start.0 > target.0 || start.1 > target.1 {
            return Err(Error::domain(format!(
                "start {start:?} is not below-left of target {target:?}"
            )));
        }
        self.check_site(start)?;
        self.check_site(target)
    }

    /// Advances one row of the recursion. `prev` holds the previous row, or is
    /// `None` on the first row. Returns for each cell whether the maximum came
    /// from below; ties go to the left neighbour.
    fn step_row(&self, j: u64, i0: u64, prev: Option<&[f64]>, cur: &mut [f64], mut choice: impl FnMut(usize, bool)) {
        self.fill_weights(j, i0, cur);
        let mut left = f64::NEG_INFINITY;
        for k in 0..cur.len() {
            let below = prev.map_or(f64::NEG_INFINITY, |p| p[k]);
            let from_below = below > left;
            let best = if from_below { below } else { left };
            let best = if k == 0 && prev.is_none() { 0.0 } else { best };
            cur[k] += best;
            left = cur[k];
            choice(k, from_below);
        }
    }

    /// Last-passage time from `start` to `target`, with a maximal path when
    /// `want_path` is set.
    pub fn last_passage(&self, start: Site, target: Site, want_path: bool) -> Result<PassageResult> {
        self.last_passage_budgeted(start, target, want_path, DEFAULT_MEMORY_BUDGET)
    }

    /// As [`last_passage`](Self::last_passage) with an explicit memory budget
    /// in bytes for the stored backtracking bits.
    pub fn last_passage_budgeted(
        &self,
        start: Site,
        target: Site,
        want_path: bool,
        budget: usize,
    ) -> Result<PassageResult> {
        self.check_rect(start, target)?;
        let w = (target.0 - start.0 + 1) as usize;
        let h = (target.1 - start.1 + 1) as usize;
        let mut prev = vec![0.0; w];
        let mut cur = vec![0.0; w];

        if !want_path {
            for (r, j) in (start.1..=target.1).enumerate() {
                let p = (r > 0).then_some(prev.as_slice());
                self.step_row(j, start.0, p, &mut cur, |_, _| {});
                std::mem::swap(&mut prev, &mut cur);
            }
            return Ok(PassageResult {
                value: prev[w - 1],
                path: None,
                start,
                target,
            });
        }

        let cells = w.checked_mul(h).ok_or_else(|| Error::MemoryBudget {
            needed: usize::MAX,
            budget,
        })?;
        let needed = cells.div_ceil(64) * 8 + 2 * w * 8;
        if needed > budget {
            return Err(Error::MemoryBudget { needed, budget });
        }
        let mut bits = vec![0u64; cells.div_ceil(64)];
        for (r, j) in (start.1..=target.1).enumerate() {
            let p = (r > 0).then_some(prev.as_slice());
            self.step_row(j, start.0, p, &mut cur, |k, up| {
                if up {
                    let idx = r * w + k;
                    bits[idx / 64] |= 1 << (idx % 64);
                }
            });
            std::mem::swap(&mut prev, &mut cur);
        }
        let (mut k, mut r) = (w - 1, h - 1);
        let mut path = Vec::with_capacity(w + h - 1);
        loop {
            path.push((start.0 + k as u64, start.1 + r as u64));
            if k == 0 && r == 0 {
                break;
            }
            let idx = r * w + k;
            if bits[idx / 64] >> (idx % 64) & 1 == 1 {
                r -= 1;
            } else {
                k -= 1;
            }
        }
        path.reverse();
        Ok(PassageResult {
            value: prev[w - 1],
            path: Some(path),
            start,
            target,
        })
    }

    /// Same value and path as [`last_passage`](Self::last_passage) with
    /// `want_path`, storing only every `block_rows`-th row and recomputing one
    /// block at a time while backtracking.
    pub fn last_passage_checkpointed(&self, start: Site, target: Site, block_rows: usize) -> Result<PassageResult> {
        if block_rows == 0 {
            return Err(Error::domain("block_rows must be at least 1"));
        }
        self.check_rect(start, target)?;
        let w = (target.0 - start.0 + 1) as usize;
        let h = (target.1 - start.1 + 1) as usize;

        // checkpoints[b] is the row preceding block b (None for the first block)
        let mut checkpoints: Vec<Option<Vec<f64>>> = Vec::with_capacity(h.div_ceil(block_rows));
        let mut prev = vec![0.0; w];
        let mut cur = vec![0.0; w];
        for r in 0..h {
            if r % block_rows == 0 {
                checkpoints.push((r > 0).then(|| prev.clone()));
            }
            let p = (r > 0).then_some(prev.as_slice());
            self.step_row(start.1 + r as u64, start.0, p, &mut cur, |_, _| {});
            std::mem::swap(&mut prev, &mut cur);
        }
        let value = prev[w - 1];

        let mut path = Vec::with_capacity(w + h - 1);
        let (mut k, mut r) = (w - 1, h - 1);
        let mut block_up = vec![false; 0];
        for b in (0..checkpoints.len()).rev() {
            let r0 = b * block_rows;
            let rows = (h - r0).min(block_rows);
            block_up.clear();
            block_up.resize(rows * w, false);
            let mut prev = checkpoints[b].clone();
            let mut cur = vec![0.0; w];
            for q in 0..rows {
                self.step_row(start.1 + (r0 + q) as u64, start.0, prev.as_deref(), &mut cur, |kk, up| {
                    block_up[q * w + kk] = up;
                });
                prev = Some(std::mem::replace(&mut cur, prev.unwrap_or_else(|| vec![0.0; w])));
            }
            while r >= r0 {
                path.push((start.0 + k as u64, start.1 + r as u64));
                if k == 0 && r == 0 {
                    break;
                }
                if block_up[(r - r0) * w + k] {
                    if r == r0 {
                        r -= 1;
                        break;
                    }
                    r -= 1;
                } else {
                    k -= 1;
                }
            }
        }
        path.reverse();
        Ok(PassageResult {
            value,
            path: Some(path),
            start,
            target,
        })
    }

    /// `G(0 -> (floor(n x), floor(n y))) / n`. A relative guard of `1e-9` keeps
    /// products like `0.3 * 10` from rounding down to the previous site.
    pub fn scaled_passage(&self, x: f64, y: f64) -> Result<f64> {
        if !(x >= 0.0 && y >= 0.0) {
            return Err(Error::domain(format!("target ({x}, {y}) must be nonnegative")));
        }
        let target = self.lattice_target(x, y);
        Ok(self.last_passage((0, 0), target, false)?.value / f64::from(self.n))
    }

    /// Lattice site representing the macroscopic point `(x, y)`.
    pub fn lattice_target(&self, x: f64, y: f64) -> Site {
        let n = f64::from(self.n);
        let snap = |v: f64| (n * v * (1.0 + 1e-9)).floor() as u64;
        (snap(x), snap(y))
    }

    /// Writes row `j` of the recursion over the rectangle `start..=target`:
    /// the row index as little-endian `u64`, then the row values as
    /// little-endian `f64`.
    pub fn dump_row(&self, start: Site, target: Site, j: u64, out: &mut impl Write) -> Result<()> {
        self.check_rect(start, target)?;
        if j < start.1 || j > target.1 {
            return Err(Error::domain(format!("row {j} outside {}..={}", start.1, target.1)));
        }
        let w = (target.0 - start.0 + 1) as usize;
        let mut prev = vec![0.0; w];
        let mut cur = vec![0.0; w];
        for (r, jj) in (start.1..=j).enumerate() {
            let p = (r > 0).then_some(prev.as_slice());
            self.step_row(jj, start.0, p, &mut cur, |_, _| {});
            std::mem::swap(&mut prev, &mut cur);
        }
        let io = |e| Error::io("<row dump>", e);
        out.write_all(&j.to_le_bytes()).map_err(io)?;
        for v in &prev {
            out.write_all(&v.to_le_bytes()).map_err(io)?;
        }
        Ok(())
    }
}

/// Reads a row written by [`EnvironmentSpec::dump_row`].
pub fn read_row_dump(input: &mut impl Read) -> Result<(u64, Vec<f64>)> {
    let mut bytes = Vec::new();
    input
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io("<row dump>", e))?;
    if bytes.len() < 8 || (bytes.len() - 8) % 8 != 0 {
        return Err(Error::Parse(format!("row dump has invalid length {}", bytes.len())));
    }
    let word = |c: &[u8]| <[u8; 8]>::try_from(c).unwrap();
    let j = u64::from_le_bytes(word(&bytes[..8]));
    let vals = bytes[8..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(word(c)))
        .collect();
    Ok((j, vals))
}
