//! Common interface for every background-activity filter in the crate.

use std::fmt;
use std::str::FromStr;

use crate::baselines::{Baf, GuoStcf, HashHeat, HashHeatParams, Onf};
use crate::error::{Error, Result};
use crate::events::{Event, Label, LabeledStream, SensorGeometry};
use crate::stcf::{Bf2Stcf, StcfParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub class: Label,
    /// Number of supporting neighbours, for filters that count them.
    pub support: Option<u32>,
}

impl Classification {
    pub fn new(class: Label, support: Option<u32>) -> Self {
        Classification { class, support }
    }
}

/// A stateful, causal event classifier.
pub trait EventFilter {
    fn classify(&mut self, event: &Event) -> Result<Classification>;

    fn name(&self) -> &'static str;
}

impl<F: EventFilter + ?Sized> EventFilter for Box<F> {
    fn classify(&mut self, event: &Event) -> Result<Classification> {
        (**self).classify(event)
    }

    fn name(&self) -> &'static str {
        (**self).name()
    }
}

/// Feeds every event of `stream` through `filter` in order.
pub fn classify_stream<F: EventFilter + ?Sized>(filter: &mut F, stream: &LabeledStream) -> Result<Vec<Classification>> {
    stream.iter().map(|e| filter.classify(e)).collect()
}

/// Rejects timestamps that go backwards.
#[derive(Debug, Clone, Default)]
pub(crate) struct OrderGuard {
    seen: usize,
    last: u64,
}

impl OrderGuard {
    pub(crate) fn check(&mut self, t: u64) -> Result<()> {
        if self.seen > 0 && t < self.last {
            return Err(Error::Order {
                index: self.seen,
                previous: self.last,
                t,
            });
        }
        self.seen += 1;
        self.last = t;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterKind {
    Bf2,
    Baf,
    Guo,
    Onf,
    HashHeat,
}

impl FilterKind {
    pub const ALL: [FilterKind; 5] = [
        FilterKind::Bf2,
        FilterKind::Baf,
        FilterKind::Guo,
        FilterKind::Onf,
        FilterKind::HashHeat,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FilterKind::Bf2 => "bf2",
            FilterKind::Baf => "baf",
            FilterKind::Guo => "guo",
            FilterKind::Onf => "onf",
            FilterKind::HashHeat => "hashheat",
        }
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bf2" => Ok(FilterKind::Bf2),
            "baf" => Ok(FilterKind::Baf),
            "guo" | "stcf" | "guo-stcf" => Ok(FilterKind::Guo),
            "onf" => Ok(FilterKind::Onf),
            "hashheat" => Ok(FilterKind::HashHeat),
            other => Err(Error::Config(format!("unknown filter `{other}`"))),
        }
    }
}

/// The parameter swept when tracing a ROC curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Knob {
    /// Correlation window in microseconds.
    Tau,
    /// HashHeat segment length.
    SegmentLength,
}

impl Knob {
    pub fn as_str(self) -> &'static str {
        match self {
            Knob::Tau => "tau_us",
            Knob::SegmentLength => "segment_length",
        }
    }
}

/// Everything needed to build any filter from scratch.
#[derive(Debug, Clone, PartialEq)]
pub enum FilterConfig {
    Bf2 { params: StcfParams, hash_seed: u64 },
    Baf { tau: u64 },
    Guo { tau: u64, support: u32 },
    Onf { tau: u64 },
    HashHeat { params: HashHeatParams, seed: u64 },
}

impl FilterConfig {
    pub fn kind(&self) -> FilterKind {
        match self {
            FilterConfig::Bf2 { .. } => FilterKind::Bf2,
            FilterConfig::Baf { .. } => FilterKind::Baf,
            FilterConfig::Guo { .. } => FilterKind::Guo,
            FilterConfig::Onf { .. } => FilterKind::Onf,
            FilterConfig::HashHeat { .. } => FilterKind::HashHeat,
        }
    }

    pub fn knob(&self) -> Knob {
        match self {
            FilterConfig::HashHeat { .. } => Knob::SegmentLength,
            _ => Knob::Tau,
        }
    }

    /// Copy of this configuration with the sweep parameter set to `value`.
    /// Windows are rounded to whole microseconds.
    pub fn with_knob(&self, value: f64) -> Result<Self> {
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::Config(format!("knob value must be positive, got {value}")));
        }
        let tau = (value.round() as u64).max(1);
        Ok(match self {
            FilterConfig::Bf2 { params, hash_seed } => FilterConfig::Bf2 {
                params: params.with_tau(tau)?,
                hash_seed: *hash_seed,
            },
            FilterConfig::Baf { .. } => FilterConfig::Baf { tau },
            FilterConfig::Guo { support, .. } => FilterConfig::Guo { tau, support: *support },
            FilterConfig::Onf { .. } => FilterConfig::Onf { tau },
            FilterConfig::HashHeat { params, seed } => FilterConfig::HashHeat {
                params: params.with_segment_length(value)?,
                seed: *seed,
            },
        })
    }

    pub fn build(&self, geometry: SensorGeometry) -> Result<Box<dyn EventFilter + Send>> {
        Ok(match self {
            FilterConfig::Bf2 { params, hash_seed } => Box::new(Bf2Stcf::new(geometry, *params, *hash_seed)?),
            FilterConfig::Baf { tau } => Box::new(Baf::new(geometry, *tau)),
            FilterConfig::Guo { tau, support } => Box::new(GuoStcf::new(geometry, *tau, *support)?),
            FilterConfig::Onf { tau } => Box::new(Onf::new(geometry, *tau)),
            FilterConfig::HashHeat { params, seed } => Box::new(HashHeat::new(*params, *seed)?),
        })
    }

    /// One-line `key=value` summary, used to echo configuration into outputs.
    pub fn describe(&self) -> String {
        match self {
            FilterConfig::Bf2 { params, hash_seed } => {
                let c = params.bf2();
                format!(
                    "filter=bf2 tau_us={} s={} W={} D={} K={} tau_row_us={} clear_mode={} polarity_split={} hash_seed={}",
                    params.tau(),
                    params.support(),
                    c.width(),
                    c.depth(),
                    c.banks(),
                    c.tau_row(),
                    params.clear_mode(),
                    params.polarity_split(),
                    hash_seed
                )
            }
            FilterConfig::Baf { tau } => format!("filter=baf tau_us={tau}"),
            FilterConfig::Guo { tau, support } => format!("filter=guo tau_us={tau} s={support}"),
            FilterConfig::Onf { tau } => format!("filter=onf tau_us={tau}"),
            FilterConfig::HashHeat { params, seed } => format!(
                "filter=hashheat k={} m={} cell_width={} segment_length={} threshold={} reset_period={} aggregate={} seed={}",
                params.functions,
                params.cells,
                params.cell_width,
                params.segment_length,
                params.threshold,
                params.reset_period,
                params.aggregate,
                seed
            ),
        }
    }
}
