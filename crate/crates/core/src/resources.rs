//! Analytic memory, energy and throughput models.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bf2::Bf2Config;
use crate::error::{Error, Result};
use crate::events::SensorGeometry;
use crate::filter::{FilterConfig, FilterKind};

/// Bits per stored timestamp in a time surface.
pub const TIMESTAMP_BITS: u64 = 32;
/// Bits per ONF row or column cell.
pub const ONF_CELL_BITS: u64 = 64;

const DEFAULT_COSTS: &str = include_str!("../data/costs_45nm.toml");
const REQUIRED_OPS: [&str; 4] = ["add8", "add32", "h3_eval", "lsh_eval"];

/// Sensor sizes used for the scaling comparison.
pub const REFERENCE_GEOMETRIES: [(u16, u16); 4] = [(240, 180), (346, 260), (640, 480), (1280, 960)];

pub fn memory_bits(config: &FilterConfig, geometry: SensorGeometry) -> u64 {
    let (r, c) = (geometry.height() as u64, geometry.width() as u64);
    match config {
        FilterConfig::Bf2 { params, .. } => {
            let copies = if params.polarity_split() { 2 } else { 1 };
            copies * params.bf2().memory_bits()
        }
        FilterConfig::Baf { .. } | FilterConfig::Guo { .. } => r * c * TIMESTAMP_BITS,
        FilterConfig::Onf { .. } => (r + c) * ONF_CELL_BITS,
        FilterConfig::HashHeat { params, .. } => params.memory_bits(),
    }
}

pub fn bits_to_kib(bits: u64) -> f64 {
    bits as f64 / 8192.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemoryAnchor {
    pub bytes: u64,
    pub pj_per_bit: f64,
}

/// Per-operation energy costs, loaded from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyCostTable {
    pub technology: String,
    pub event_rate_per_pixel: f64,
    pub memory: Vec<MemoryAnchor>,
    pub ops: BTreeMap<String, f64>,
}

impl Default for EnergyCostTable {
    fn default() -> Self {
        Self::parse(DEFAULT_COSTS).expect("bundled cost table is valid")
    }
}

impl EnergyCostTable {
    pub fn parse(text: &str) -> Result<Self> {
        let table: EnergyCostTable = toml::from_str(text).map_err(|e| Error::CostTable(e.to_string()))?;
        table.validate()?;
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("cost table serialises")
    }

    /// Costs may be zero but must be finite and non-negative.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::CostTable(m));
        if self.memory.is_empty() {
            return bad("no memory anchors".into());
        }
        if self.memory.windows(2).any(|w| w[1].bytes <= w[0].bytes) {
            return bad("memory anchors must have strictly increasing capacity".into());
        }
        if self.memory.iter().any(|a| a.bytes == 0 || !a.pj_per_bit.is_finite() || a.pj_per_bit < 0.0) {
            return bad("memory anchors need positive capacity and a finite, non-negative cost".into());
        }
        for op in REQUIRED_OPS {
            match self.ops.get(op) {
                None => return bad(format!("missing operation `{op}`")),
                Some(v) if !v.is_finite() || *v < 0.0 => return bad(format!("operation `{op}` has invalid cost {v}")),
                _ => {}
            }
        }
        if !self.event_rate_per_pixel.is_finite() || self.event_rate_per_pixel <= 0.0 {
            return bad("event_rate_per_pixel must be positive".into());
        }
        Ok(())
    }

    /// Every cost multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut t = self.clone();
        t.memory.iter_mut().for_each(|a| a.pj_per_bit *= factor);
        t.ops.values_mut().for_each(|v| *v *= factor);
        t
    }

    pub fn op(&self, name: &str) -> Result<f64> {
        self.ops
            .get(name)
            .copied()
            .ok_or_else(|| Error::CostTable(format!("missing operation `{name}`")))
    }

    /// Per-bit access cost for an array of `bits` bits.
    pub fn pj_per_bit(&self, bits: u64) -> f64 {
        let bytes = (bits as f64 / 8.0).max(1.0);
        let a = &self.memory;
        if a.len() == 1 || bytes <= a[0].bytes as f64 {
            return a[0].pj_per_bit;
        }
        let i = a.iter().position(|x| bytes <= x.bytes as f64).unwrap_or(a.len() - 1).max(1);
        let (lo, hi) = (a[i - 1], a[i]);
        let f = (bytes.ln() - (lo.bytes as f64).ln()) / ((hi.bytes as f64).ln() - (lo.bytes as f64).ln());
        if lo.pj_per_bit > 0.0 && hi.pj_per_bit > 0.0 {
            (lo.pj_per_bit.ln() + f * (hi.pj_per_bit.ln() - lo.pj_per_bit.ln())).exp()
        } else {
            (lo.pj_per_bit + f * (hi.pj_per_bit - lo.pj_per_bit)).max(0.0)
        }
    }
}

/// One kind of work done for every event.
#[derive(Debug, Clone, PartialEq)]
pub enum Operation {
    /// `bits` bits read or written in an array of `array_bits` bits.
    Memory { bits: f64, array_bits: u64 },
    /// `count` applications of a named operation from the cost table.
    Op { name: &'static str, count: f64 },
}

/// Average per-event work of a filter.
pub fn operation_trace(config: &FilterConfig, geometry: SensorGeometry, costs: &EnergyCostTable) -> Vec<Operation> {
    use Operation::*;
    let surface = memory_bits(config, geometry);
    match config {
        FilterConfig::Bf2 { params, .. } => {
            let c = params.bf2();
            let (k, d, w) = (c.banks() as f64, c.depth() as f64, c.width() as f64);
            let bank = (c.width() * c.depth()) as u64;
            let per_row = costs.event_rate_per_pixel * geometry.pixels() as f64 * c.tau_row() as f64 * 1e-6;
            vec![
                Memory { bits: 8.0 * d * k, array_bits: bank },
                Memory { bits: k, array_bits: bank },
                Op { name: "h3_eval", count: 9.0 * k },
                Memory { bits: k * w / per_row.max(1.0), array_bits: bank },
            ]
        }
        FilterConfig::Baf { .. } | FilterConfig::Guo { .. } => vec![
            Memory { bits: 9.0 * TIMESTAMP_BITS as f64, array_bits: surface },
            Op { name: "add32", count: 16.0 },
        ],
        FilterConfig::Onf { .. } => vec![
            Memory { bits: 8.0 * ONF_CELL_BITS as f64, array_bits: surface },
            Op { name: "add32", count: 12.0 },
        ],
        FilterConfig::HashHeat { params, .. } => {
            let k = params.functions as f64;
            vec![
                Memory { bits: 2.0 * k * params.cell_width as f64, array_bits: surface },
                Op { name: "lsh_eval", count: k },
                Op { name: "add8", count: 2.0 * k },
            ]
        }
    }
}

pub fn energy_per_event(config: &FilterConfig, geometry: SensorGeometry, costs: &EnergyCostTable) -> Result<f64> {
    costs.validate()?;
    operation_trace(config, geometry, costs)
        .iter()
        .map(|op| match op {
            Operation::Memory { bits, array_bits } => Ok(bits * costs.pj_per_bit(*array_bits)),
            Operation::Op { name, count } => Ok(count * costs.op(name)?),
        })
        .sum()
}

/// BF2 layout used for a sensor size: four banks of four rows, with the row
/// width chosen per geometry. Sizes outside the reference set get a width
/// near 0.1 KiB of memory per unit of sqrt(R*C).
pub fn default_bf2_config(geometry: SensorGeometry, tau: u64) -> Result<Bf2Config> {
    let width = match (geometry.width(), geometry.height()) {
        (240, 180) => 8192,
        (346, 260) => 16384,
        (640, 480) => 32768,
        (1280, 960) => 65536,
        _ => {
            let n = (geometry.pixels() as f64).sqrt();
            let target = 0.1 * n * 8192.0 / 16.0;
            1usize << target.log2().round().clamp(1.0, 31.0) as u32
        }
    };
    Bf2Config::from_window(width, 4, 4, tau)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub geometry: SensorGeometry,
    pub kind: FilterKind,
    pub memory_bits: u64,
    pub energy_pj: f64,
}

/// Memory and energy of each filter at each sensor size. `configs` supplies
/// the filter settings for a geometry.
pub fn scaling_table<F>(geometries: &[SensorGeometry], costs: &EnergyCostTable, configs: F) -> Result<Vec<ScalingRow>>
where
    F: Fn(SensorGeometry) -> Result<Vec<FilterConfig>>,
{
    let mut rows = Vec::new();
    for &g in geometries {
        for config in configs(g)? {
            rows.push(ScalingRow {
                geometry: g,
                kind: config.kind(),
                memory_bits: memory_bits(&config, g),
                energy_pj: energy_per_event(&config, g, costs)?,
            });
        }
    }
    Ok(rows)
}

/// Least-squares fit of `y = c * x` with its coefficient of determination.
pub fn fit_through_origin(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let c = sxy / sxx;
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - c * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    (c, r2)
}

/// Clock cycles spent per event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleModel {
    pub search_cycles: u32,
    pub store_cycles: u32,
}

impl Default for CycleModel {
    fn default() -> Self {
        CycleModel {
            search_cycles: 8,
            store_cycles: 1,
        }
    }
}

impl CycleModel {
    pub fn cycles_per_event(&self) -> u32 {
        self.search_cycles + self.store_cycles
    }

    pub fn throughput(&self, clock_hz: f64) -> f64 {
        clock_hz / self.cycles_per_event() as f64
    }
}

/// Events per second of the BF2 pipeline at `clock_hz`.
pub fn throughput(clock_hz: f64) -> f64 {
    CycleModel::default().throughput(clock_hz)
}

/// Whether a row of `config` can be zeroed `word_bits` at a time within one
/// row period at `clock_hz`.
pub fn row_clear_feasible(config: &Bf2Config, clock_hz: f64, word_bits: usize) -> bool {
    let cycles = config.width().div_ceil(word_bits.max(1)) as f64;
    cycles <= config.tau_row() as f64 * 1e-6 * clock_hz
}
