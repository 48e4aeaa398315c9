//! Background-activity filtering on top of [`Bf2`].
//!
//! For each event: move the store's active row to the event's bin, look up
//! the eight neighbouring pixels (the event's own pixel is never consulted),
//! count the neighbours that hit in any row, then store the event whatever
//! its class. An event is signal when at least `s` neighbours hit.

use crate::bf2::{Bf2, Bf2Config, ClearMode};
use crate::error::{Error, Result};
use crate::events::{Event, Label, LabeledStream, Polarity, SensorGeometry};
use crate::filter::{classify_stream, Classification, EventFilter};

const OFFSETS: [(i32, i32); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// The in-sensor pixels at Chebyshev distance 1 from `(x, y)`.
pub fn neighbor_coords(x: u16, y: u16, geometry: SensorGeometry) -> impl Iterator<Item = (u16, u16)> {
    let (w, h) = (geometry.width() as i32, geometry.height() as i32);
    OFFSETS.iter().filter_map(move |&(dx, dy)| {
        let (nx, ny) = (x as i32 + dx, y as i32 + dy);
        (nx >= 0 && ny >= 0 && nx < w && ny < h).then_some((nx as u16, ny as u16))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StcfParams {
    tau: u64,
    support: u32,
    bf2: Bf2Config,
    clear_mode: ClearMode,
    polarity_split: bool,
}

impl StcfParams {
    /// Window `tau` (us) spread over `depth` rows of `width` bits in `banks`
    /// banks; `support` is the neighbour count needed for signal.
    pub fn new(tau: u64, support: u32, width: usize, depth: usize, banks: usize) -> Result<Self> {
        Self::from_config(tau, support, Bf2Config::from_window(width, depth, banks, tau)?)
    }

    pub fn from_config(tau: u64, support: u32, bf2: Bf2Config) -> Result<Self> {
        if !(1..=8).contains(&support) {
            return Err(Error::Config(format!("support s must be in [1, 8], got {support}")));
        }
        Ok(StcfParams {
            tau,
            support,
            bf2,
            clear_mode: ClearMode::Strict,
            polarity_split: false,
        })
    }

    pub fn with_clear_mode(mut self, mode: ClearMode) -> Self {
        self.clear_mode = mode;
        self
    }

    /// Keep ON and OFF events in two independent stores.
    pub fn with_polarity_split(mut self, split: bool) -> Self {
        self.polarity_split = split;
        self
    }

    /// Same layout, new window; `tau_row` is recomputed from `tau`.
    pub fn with_tau(self, tau: u64) -> Result<Self> {
        let bf2 = Bf2Config::from_window(self.bf2.width(), self.bf2.depth(), self.bf2.banks(), tau)?;
        Ok(StcfParams { tau, bf2, ..self })
    }

    pub fn tau(&self) -> u64 {
        self.tau
    }

    pub fn support(&self) -> u32 {
        self.support
    }

    pub fn bf2(&self) -> &Bf2Config {
        &self.bf2
    }

    pub fn clear_mode(&self) -> ClearMode {
        self.clear_mode
    }

    pub fn polarity_split(&self) -> bool {
        self.polarity_split
    }
}

/// Spatio-temporal correlation filter backed by one (or, with polarity split,
/// two) [`Bf2`] stores.
#[derive(Debug, Clone)]
pub struct Bf2Stcf {
    geometry: SensorGeometry,
    params: StcfParams,
    stores: Vec<Bf2>,
}

impl Bf2Stcf {
    pub fn new(geometry: SensorGeometry, params: StcfParams, hash_seed: u64) -> Result<Self> {
        let copies = if params.polarity_split { 2 } else { 1 };
        let stores = (0..copies)
            .map(|_| Bf2::new(params.bf2, hash_seed).map(|s| s.with_clear_mode(params.clear_mode)))
            .collect::<Result<_>>()?;
        Ok(Bf2Stcf {
            geometry,
            params,
            stores,
        })
    }

    pub fn params(&self) -> &StcfParams {
        &self.params
    }

    pub fn store(&self) -> &Bf2 {
        &self.stores[0]
    }

    /// Number of neighbours of `(x, y)` present in `store` in any row.
    fn support_in(&self, store: usize, x: u16, y: u16) -> u32 {
        neighbor_coords(x, y, self.geometry)
            .filter(|&(nx, ny)| self.stores[store].contains(nx, ny))
            .count() as u32
    }
}

impl EventFilter for Bf2Stcf {
    fn classify(&mut self, event: &Event) -> Result<Classification> {
        self.geometry.check(event)?;
        for store in &mut self.stores {
            store.advance_to(event.t)?;
        }
        let which = match (self.params.polarity_split, event.polarity) {
            (true, Polarity::On) => 1,
            _ => 0,
        };
        let support = self.support_in(which, event.x, event.y);
        self.stores[which].insert(event.x, event.y, event.t)?;
        let class = if support >= self.params.support {
            Label::Signal
        } else {
            Label::Noise
        };
        Ok(Classification {
            class,
            support: Some(support),
        })
    }

    fn name(&self) -> &'static str {
        "bf2"
    }
}

/// Runs a fresh [`Bf2Stcf`] over `stream`.
pub fn process_stream(stream: &LabeledStream, params: StcfParams, hash_seed: u64) -> Result<Vec<Classification>> {
    let mut filter = Bf2Stcf::new(stream.geometry(), params, hash_seed)?;
    classify_stream(&mut filter, stream)
}
