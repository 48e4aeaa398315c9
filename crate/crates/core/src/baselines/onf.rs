use crate::error::Result;
use crate::events::{Event, Label, LabeledStream, Polarity, SensorGeometry};
use crate::filter::{classify_stream, Classification, EventFilter, OrderGuard};

/// Latest event seen in one sensor row (or column). `coord` is the
/// orthogonal coordinate: x for a row cell, y for a column cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Cell {
    coord: u16,
    t: u64,
    polarity: Polarity,
}

/// One-cell-per-row and one-cell-per-column filter.
///
/// An event is supported by a stored cell in rows y-1..=y+1 or columns
/// x-1..=x+1 whose event lies in the 8-neighbourhood and is younger than tau.
#[derive(Debug, Clone)]
pub struct Onf {
    geometry: SensorGeometry,
    tau: u64,
    rows: Vec<Option<Cell>>,
    cols: Vec<Option<Cell>>,
    order: OrderGuard,
}

impl Onf {
    pub fn new(geometry: SensorGeometry, tau: u64) -> Self {
        Onf {
            geometry,
            tau,
            rows: vec![None; geometry.height() as usize],
            cols: vec![None; geometry.width() as usize],
            order: OrderGuard::default(),
        }
    }

    /// Equivalent storage: a 64-bit word per row and per column.
    pub fn memory_bits(&self) -> u64 {
        (self.rows.len() + self.cols.len()) as u64 * 64
    }

    fn supports(&self, cell: Option<Cell>, own: u16, other_delta: u16, t: u64) -> bool {
        match cell {
            Some(c) => own.abs_diff(c.coord) <= 1 && (other_delta != 0 || c.coord != own) && t - c.t < self.tau,
            None => false,
        }
    }

    fn span(centre: u16, len: u16) -> std::ops::RangeInclusive<u16> {
        centre.saturating_sub(1)..=(centre + 1).min(len - 1)
    }
}

impl EventFilter for Onf {
    fn classify(&mut self, e: &Event) -> Result<Classification> {
        self.geometry.check(e)?;
        self.order.check(e.t)?;
        let hit = Self::span(e.y, self.geometry.height())
            .any(|r| self.supports(self.rows[r as usize], e.x, r.abs_diff(e.y), e.t))
            || Self::span(e.x, self.geometry.width())
                .any(|c| self.supports(self.cols[c as usize], e.y, c.abs_diff(e.x), e.t));
        self.rows[e.y as usize] = Some(Cell {
            coord: e.x,
            t: e.t,
            polarity: e.polarity,
        });
        self.cols[e.x as usize] = Some(Cell {
            coord: e.y,
            t: e.t,
            polarity: e.polarity,
        });
        let class = if hit { Label::Signal } else { Label::Noise };
        Ok(Classification::new(class, None))
    }

    fn name(&self) -> &'static str {
        "onf"
    }
}

pub fn onf_classify_stream(stream: &LabeledStream, tau: u64) -> Result<Vec<Classification>> {
    classify_stream(&mut Onf::new(stream.geometry(), tau), stream)
}
