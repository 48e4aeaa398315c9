//! The rotating multi-hash Bloom store.
//!
//! `K` banks, one per hash function, each `D` rows of `W` bits. Row `j` holds
//! the events of every time bin `b` with `b % D == j`, where a bin spans
//! `tau_row` microseconds, so the store as a whole remembers a sliding window
//! of `D * tau_row`. A lookup ANDs the addressed bit across banks for each row
//! and reports the per-row result.
//!
//! Rows are cleared when the active bin moves forward. [`ClearMode::Strict`]
//! clears every row the pointer passes over, so nothing older than the window
//! survives a long gap. [`ClearMode::Literal`] clears only the destination
//! row; after a gap of more than one bin the skipped rows keep stale bits.

use crate::error::{Error, Result};
use crate::hash::H3Family;

/// Upper bound on banks; lookups keep the per-bank indices on the stack.
pub const MAX_BANKS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bf2Config {
    width: usize,
    depth: usize,
    banks: usize,
    tau_row: u64,
}

impl Bf2Config {
    pub fn new(width: usize, depth: usize, banks: usize, tau_row: u64) -> Result<Self> {
        if width < 2 || !width.is_power_of_two() {
            return Err(Error::Config(format!(
                "row width W must be a power of two >= 2, got {width}"
            )));
        }
        if depth < 2 {
            return Err(Error::Config(format!("depth D must be >= 2, got {depth}")));
        }
        if banks == 0 || banks > MAX_BANKS {
            return Err(Error::Config(format!(
                "bank count K must be in [1, {MAX_BANKS}], got {banks}"
            )));
        }
        if tau_row == 0 {
            return Err(Error::Config("tau_row must be >= 1 us".into()));
        }
        Ok(Bf2Config {
            width,
            depth,
            banks,
            tau_row,
        })
    }

    /// Splits a correlation window `tau` over `depth` rows with
    /// `tau_row = floor(tau / depth)`; see [`Bf2Config::window`] for the
    /// window actually covered.
    pub fn from_window(width: usize, depth: usize, banks: usize, tau: u64) -> Result<Self> {
        if depth == 0 {
            return Err(Error::Config("depth D must be >= 2, got 0".into()));
        }
        let tau_row = tau / depth as u64;
        if tau_row == 0 {
            return Err(Error::Config(format!(
                "window of {tau} us is shorter than one microsecond per row at D={depth}"
            )));
        }
        Self::new(width, depth, banks, tau_row)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn banks(&self) -> usize {
        self.banks
    }

    pub fn tau_row(&self) -> u64 {
        self.tau_row
    }

    /// Effective window `D * tau_row` in microseconds.
    pub fn window(&self) -> u64 {
        self.depth as u64 * self.tau_row
    }

    /// `K * W * D`.
    pub fn memory_bits(&self) -> u64 {
        (self.banks * self.width * self.depth) as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClearMode {
    #[default]
    Strict,
    Literal,
}

impl std::fmt::Display for ClearMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ClearMode::Strict => "strict",
            ClearMode::Literal => "literal",
        })
    }
}

impl std::str::FromStr for ClearMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(ClearMode::Strict),
            "literal" => Ok(ClearMode::Literal),
            _ => Err(Error::Config(format!("clear mode must be strict or literal, got {s:?}"))),
        }
    }
}

/// Per-row hit flags from a lookup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchResult {
    rows: Vec<bool>,
}

impl SearchResult {
    pub fn rows(&self) -> &[bool] {
        &self.rows
    }

    pub fn row(&self, j: usize) -> bool {
        self.rows[j]
    }

    /// OR across rows.
    pub fn any(&self) -> bool {
        self.rows.iter().any(|&r| r)
    }

    pub fn hit_count(&self) -> usize {
        self.rows.iter().filter(|&&r| r).count()
    }
}

#[derive(Debug, Clone)]
pub struct Bf2 {
    config: Bf2Config,
    hashes: H3Family,
    bits: Vec<u64>,
    mode: ClearMode,
    row_ptr: usize,
    current_bin: u64,
    last_t: u64,
    initialized: bool,
    updates: usize,
}

impl Bf2 {
    pub fn new(config: Bf2Config, hash_seed: u64) -> Result<Self> {
        let hashes = H3Family::new(config.banks, config.width, hash_seed)?;
        let total = config.memory_bits() as usize;
        Ok(Bf2 {
            config,
            hashes,
            bits: vec![0; total.div_ceil(64)],
            mode: ClearMode::Strict,
            row_ptr: 0,
            current_bin: 0,
            last_t: 0,
            initialized: false,
            updates: 0,
        })
    }

    pub fn with_clear_mode(mut self, mode: ClearMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn config(&self) -> &Bf2Config {
        &self.config
    }

    pub fn clear_mode(&self) -> ClearMode {
        self.mode
    }

    pub fn hashes(&self) -> &H3Family {
        &self.hashes
    }

    pub fn row_ptr(&self) -> usize {
        self.row_ptr
    }

    /// Bits of filter state, excluding the constant-size bookkeeping.
    pub fn memory_bits(&self) -> u64 {
        self.config.memory_bits()
    }

    /// Bytes actually allocated for the bit store.
    pub fn storage_bytes(&self) -> usize {
        self.bits.len() * 8
    }

    #[inline]
    fn bit_offset(&self, bank: usize, row: usize, idx: u32) -> usize {
        (bank * self.config.depth + row) * self.config.width + idx as usize
    }

    #[inline]
    fn get(&self, bit: usize) -> bool {
        self.bits[bit >> 6] >> (bit & 63) & 1 == 1
    }

    #[inline]
    fn set(&mut self, bit: usize) {
        self.bits[bit >> 6] |= 1 << (bit & 63);
    }

    fn clear_range(&mut self, start: usize, len: usize) {
        let end = start + len;
        let mut bit = start;
        while bit < end {
            let word = bit >> 6;
            let lo = bit & 63;
            let n = (64 - lo).min(end - bit);
            let mask = if n == 64 { !0u64 } else { ((1u64 << n) - 1) << lo };
            self.bits[word] &= !mask;
            bit += n;
        }
    }

    fn clear_row(&mut self, row: usize) {
        for bank in 0..self.config.banks {
            let start = self.bit_offset(bank, row, 0);
            self.clear_range(start, self.config.width);
        }
    }

    #[inline]
    fn indices(&self, x: u16, y: u16) -> [u32; MAX_BANKS] {
        let mut idx = [0u32; MAX_BANKS];
        for (i, slot) in idx.iter_mut().take(self.config.banks).enumerate() {
            *slot = self.hashes.hash(i, x, y);
        }
        idx
    }

    /// Moves the active row to the bin of `t`, clearing expired rows, without
    /// storing anything.
    pub fn advance_to(&mut self, t: u64) -> Result<()> {
        if self.initialized && t < self.last_t {
            return Err(Error::Order {
                index: self.updates,
                previous: self.last_t,
                t,
            });
        }
        self.updates += 1;
        let depth = self.config.depth as u64;
        let bin = t / self.config.tau_row;
        let row = (bin % depth) as usize;
        if !self.initialized {
            self.initialized = true;
            self.current_bin = bin;
            self.row_ptr = row;
            self.last_t = t;
            return Ok(());
        }
        if bin != self.current_bin {
            match self.mode {
                ClearMode::Strict => {
                    let steps = (bin - self.current_bin).min(depth);
                    for back in 0..steps {
                        self.clear_row(((bin - back) % depth) as usize);
                    }
                }
                ClearMode::Literal => {
                    if row != self.row_ptr {
                        self.clear_row(row);
                    }
                }
            }
            self.current_bin = bin;
            self.row_ptr = row;
        }
        self.last_t = t;
        Ok(())
    }

    /// Stores `(x, y)` in the row of `t`'s bin, advancing first.
    pub fn insert(&mut self, x: u16, y: u16, t: u64) -> Result<()> {
        self.advance_to(t)?;
        let idx = self.indices(x, y);
        let row = self.row_ptr;
        for (bank, &i) in idx.iter().take(self.config.banks).enumerate() {
            let bit = self.bit_offset(bank, row, i);
            self.set(bit);
        }
        Ok(())
    }

    pub fn search(&self, x: u16, y: u16) -> SearchResult {
        let idx = self.indices(x, y);
        let rows = (0..self.config.depth)
            .map(|row| self.row_hit(&idx, row))
            .collect();
        SearchResult { rows }
    }

    /// OR of [`Bf2::search`] across rows, stopping at the first hit.
    pub fn contains(&self, x: u16, y: u16) -> bool {
        let idx = self.indices(x, y);
        (0..self.config.depth).any(|row| self.row_hit(&idx, row))
    }

    #[inline]
    fn row_hit(&self, idx: &[u32; MAX_BANKS], row: usize) -> bool {
        idx.iter()
            .take(self.config.banks)
            .enumerate()
            .all(|(bank, &i)| self.get(self.bit_offset(bank, row, i)))
    }

    /// Set-bit count per bank (outer) and row (inner).
    pub fn occupancy(&self) -> Vec<Vec<u32>> {
        (0..self.config.banks)
            .map(|bank| {
                (0..self.config.depth)
                    .map(|row| {
                        let start = self.bit_offset(bank, row, 0);
                        (start..start + self.config.width)
                            .filter(|&b| self.get(b))
                            .count() as u32
                    })
                    .collect()
            })
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }
}
