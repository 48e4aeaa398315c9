use crate::error::{Error, Result};
use crate::events::{Event, Label, LabeledStream, SensorGeometry};
use crate::filter::{classify_stream, Classification, EventFilter, OrderGuard};
use crate::stcf::neighbor_coords;

const NEVER: u64 = u64::MAX;

/// Per-pixel timestamp of the most recent event.
#[derive(Debug, Clone)]
pub struct TimeSurface {
    geometry: SensorGeometry,
    stamps: Vec<u64>,
}

impl TimeSurface {
    pub fn new(geometry: SensorGeometry) -> Self {
        TimeSurface {
            geometry,
            stamps: vec![NEVER; geometry.pixels()],
        }
    }

    pub fn geometry(&self) -> SensorGeometry {
        self.geometry
    }

    pub fn get(&self, x: u16, y: u16) -> Option<u64> {
        let t = self.stamps[self.geometry.index(x, y)];
        (t != NEVER).then_some(t)
    }

    pub fn set(&mut self, x: u16, y: u16, t: u64) {
        let i = self.geometry.index(x, y);
        self.stamps[i] = t;
    }

    /// Whether `(x, y)` fired strictly less than `tau` before `t`.
    pub fn recent(&self, x: u16, y: u16, t: u64, tau: u64) -> bool {
        self.get(x, y).is_some_and(|ts| t.saturating_sub(ts) < tau)
    }
}

/// Signal if any neighbour fired within `tau`.
#[derive(Debug, Clone)]
pub struct Baf {
    tau: u64,
    surface: TimeSurface,
    order: OrderGuard,
}

impl Baf {
    pub fn new(geometry: SensorGeometry, tau: u64) -> Self {
        Baf {
            tau,
            surface: TimeSurface::new(geometry),
            order: OrderGuard::default(),
        }
    }
}

impl EventFilter for Baf {
    fn classify(&mut self, e: &Event) -> Result<Classification> {
        let g = self.surface.geometry();
        g.check(e)?;
        self.order.check(e.t)?;
        let hit = neighbor_coords(e.x, e.y, g).any(|(nx, ny)| self.surface.recent(nx, ny, e.t, self.tau));
        self.surface.set(e.x, e.y, e.t);
        let class = if hit { Label::Signal } else { Label::Noise };
        Ok(Classification::new(class, None))
    }

    fn name(&self) -> &'static str {
        "baf"
    }
}

/// Signal if at least `support` neighbours fired within `tau`.
#[derive(Debug, Clone)]
pub struct GuoStcf {
    tau: u64,
    support: u32,
    surface: TimeSurface,
    order: OrderGuard,
}

impl GuoStcf {
    pub fn new(geometry: SensorGeometry, tau: u64, support: u32) -> Result<Self> {
        if !(1..=8).contains(&support) {
            return Err(Error::Config(format!("support s must be in [1, 8], got {support}")));
        }
        Ok(GuoStcf {
            tau,
            support,
            surface: TimeSurface::new(geometry),
            order: OrderGuard::default(),
        })
    }
}

impl EventFilter for GuoStcf {
    fn classify(&mut self, e: &Event) -> Result<Classification> {
        let g = self.surface.geometry();
        g.check(e)?;
        self.order.check(e.t)?;
        let count = neighbor_coords(e.x, e.y, g)
            .filter(|&(nx, ny)| self.surface.recent(nx, ny, e.t, self.tau))
            .count() as u32;
        self.surface.set(e.x, e.y, e.t);
        let class = if count >= self.support { Label::Signal } else { Label::Noise };
        Ok(Classification::new(class, Some(count)))
    }

    fn name(&self) -> &'static str {
        "guo"
    }
}

pub fn baf_classify_stream(stream: &LabeledStream, tau: u64) -> Result<Vec<Classification>> {
    classify_stream(&mut Baf::new(stream.geometry(), tau), stream)
}

pub fn guo_stcf_classify_stream(stream: &LabeledStream, tau: u64, support: u32) -> Result<Vec<Classification>> {
    classify_stream(&mut GuoStcf::new(stream.geometry(), tau, support)?, stream)
}
