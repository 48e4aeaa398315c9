use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::events::{Event, Label, LabeledStream};
use crate::filter::{classify_stream, Classification, EventFilter, OrderGuard};

/// How the k addressed cells are combined before the threshold test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregate {
    #[default]
    Sum,
    Min,
}

impl fmt::Display for Aggregate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregate::Sum => "sum",
            Aggregate::Min => "min",
        })
    }
}

impl FromStr for Aggregate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(Aggregate::Sum),
            "min" => Ok(Aggregate::Min),
            _ => Err(Error::Config(format!("unknown aggregate `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HashHeatParams {
    /// Number of hash functions (k).
    pub functions: usize,
    /// Array length (m).
    pub cells: usize,
    /// Bits per cell; counts saturate at `2^cell_width - 1`.
    pub cell_width: u32,
    /// Segment length (w).
    pub segment_length: f64,
    pub threshold: u32,
    /// The array is cleared after every `reset_period` events (N).
    pub reset_period: usize,
    pub aggregate: Aggregate,
}

impl Default for HashHeatParams {
    fn default() -> Self {
        HashHeatParams {
            functions: 4,
            cells: 4096,
            cell_width: 8,
            segment_length: 1000.0,
            threshold: 4,
            reset_period: 2000,
            aggregate: Aggregate::Sum,
        }
    }
}

impl HashHeatParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("hashheat: {m}")));
        if self.functions == 0 {
            return bad("k must be at least 1");
        }
        if self.cells == 0 {
            return bad("m must be at least 1");
        }
        if !(1..=16).contains(&self.cell_width) {
            return bad("cell width must be 1..=16 bits");
        }
        if !self.segment_length.is_finite() || self.segment_length < 1.0 {
            return bad("segment length must be at least 1");
        }
        if self.reset_period == 0 {
            return bad("reset period must be at least 1");
        }
        Ok(())
    }

    pub fn with_segment_length(self, w: f64) -> Result<Self> {
        let p = HashHeatParams {
            segment_length: w,
            ..self
        };
        p.validate()?;
        Ok(p)
    }

    pub fn memory_bits(&self) -> u64 {
        self.cells as u64 * self.cell_width as u64
    }

    fn cell_max(&self) -> u16 {
        ((1u32 << self.cell_width) - 1) as u16
    }
}

/// Locality-sensitive hashing into a small saturating count array.
#[derive(Debug, Clone)]
pub struct HashHeat {
    params: HashHeatParams,
    coefficients: Vec<[f64; 4]>,
    counts: Vec<u16>,
    seen: usize,
    order: OrderGuard,
}

impl HashHeat {
    pub fn new(params: HashHeatParams, seed: u64) -> Result<Self> {
        params.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coefficients = (0..params.functions)
            .map(|_| [rng.random(), rng.random(), rng.random(), rng.random()])
            .collect();
        Ok(HashHeat {
            params,
            coefficients,
            counts: vec![0; params.cells],
            seen: 0,
            order: OrderGuard::default(),
        })
    }

    pub fn coefficients(&self) -> &[[f64; 4]] {
        &self.coefficients
    }

    /// `floor((a x + b y + c t + d) / w) mod m` for hash function `i`.
    pub fn index(&self, i: usize, x: u16, y: u16, t: u64) -> usize {
        let [a, b, c, d] = self.coefficients[i];
        let v = ((a * x as f64 + b * y as f64 + c * t as f64 + d) / self.params.segment_length).floor();
        (v as u64 % self.params.cells as u64) as usize
    }
}

impl EventFilter for HashHeat {
    fn classify(&mut self, e: &Event) -> Result<Classification> {
        self.order.check(e.t)?;
        if self.seen > 0 && self.seen.is_multiple_of(self.params.reset_period) {
            self.counts.fill(0);
        }
        self.seen += 1;
        let idx: Vec<usize> = (0..self.params.functions).map(|i| self.index(i, e.x, e.y, e.t)).collect();
        let values = idx.iter().map(|&i| self.counts[i] as u32);
        let score = match self.params.aggregate {
            Aggregate::Sum => values.sum(),
            Aggregate::Min => values.min().unwrap_or(0),
        };
        let max = self.params.cell_max();
        for &i in &idx {
            self.counts[i] = self.counts[i].saturating_add(1).min(max);
        }
        let class = if score >= self.params.threshold {
            Label::Signal
        } else {
            Label::Noise
        };
        Ok(Classification::new(class, None))
    }

    fn name(&self) -> &'static str {
        "hashheat"
    }
}

pub fn hashheat_classify_stream(stream: &LabeledStream, params: HashHeatParams, seed: u64) -> Result<Vec<Classification>> {
    classify_stream(&mut HashHeat::new(params, seed)?, stream)
}
