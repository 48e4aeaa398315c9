//! Shared helpers for the integration tests and the acceptance suite.
#![allow(dead_code)]

use bf2::events::{Event, Label, LabeledStream, Polarity, SensorGeometry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

/// Exact time-binned correlation filter: a neighbour supports an event when
/// its latest event fell in one of the last `depth` bins of `tau_row` us.
pub struct BinnedOracle {
    geometry: SensorGeometry,
    tau_row: u64,
    depth: u64,
    support: u32,
    last_bin: Vec<Option<u64>>,
}

impl BinnedOracle {
    pub fn new(geometry: SensorGeometry, tau_row: u64, depth: usize, support: u32) -> Self {
        BinnedOracle {
            geometry,
            tau_row,
            depth: depth as u64,
            support,
            last_bin: vec![None; geometry.pixels()],
        }
    }

    /// Number of supporting neighbours, then stores the event.
    pub fn support_count(&mut self, e: &Event) -> u32 {
        let g = self.geometry;
        let bin = e.t / self.tau_row;
        let oldest = (bin + 1).saturating_sub(self.depth);
        let mut count = 0;
        for dy in -1i32..=1 {
            for dx in -1i32..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let (x, y) = (e.x as i32 + dx, e.y as i32 + dy);
                if x < 0 || y < 0 || x >= g.width() as i32 || y >= g.height() as i32 {
                    continue;
                }
                if let Some(b) = self.last_bin[g.index(x as u16, y as u16)] {
                    if b >= oldest {
                        count += 1;
                    }
                }
            }
        }
        self.last_bin[g.index(e.x, e.y)] = Some(bin);
        count
    }

    pub fn classify(&mut self, e: &Event) -> Label {
        if self.support_count(e) >= self.support {
            Label::Signal
        } else {
            Label::Noise
        }
    }

    pub fn run(geometry: SensorGeometry, tau_row: u64, depth: usize, support: u32, stream: &LabeledStream) -> Vec<Label> {
        let mut o = BinnedOracle::new(geometry, tau_row, depth, support);
        stream.iter().map(|e| o.classify(e)).collect()
    }
}

/// `n` events at uniformly random pixels and times in `[0, duration)`.
pub fn uniform_stream(geometry: SensorGeometry, n: usize, duration: u64, seed: u64) -> LabeledStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut events: Vec<Event> = (0..n)
        .map(|_| {
            Event::new(
                rng.random_range(0..geometry.width()),
                rng.random_range(0..geometry.height()),
                rng.random_range(0..duration),
                Polarity::On,
            )
            .with_label(Label::Noise)
        })
        .collect();
    events.sort_by_key(|e| e.t);
    LabeledStream::new(geometry, events).unwrap()
}

/// Sparse support/target pairs. Each pair places a noise-labelled support
/// event at a random pixel and, after an exponential lag with the given
/// mean, a signal event at a random 8-neighbour. A fraction `unsupported`
/// of signal events come without a support event.
pub fn paired_stream(
    geometry: SensorGeometry,
    pairs: usize,
    mean_lag: f64,
    unsupported: f64,
    duration: u64,
    seed: u64,
) -> LabeledStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lag = Exp::new(1.0 / mean_lag).unwrap();
    let mut events = Vec::with_capacity(2 * pairs);
    for _ in 0..pairs {
        let x = rng.random_range(1..geometry.width() - 1);
        let y = rng.random_range(1..geometry.height() - 1);
        let t0 = rng.random_range(0..duration);
        let (dx, dy) = loop {
            let d = (rng.random_range(-1i32..=1), rng.random_range(-1i32..=1));
            if d != (0, 0) {
                break d;
            }
        };
        let t1 = t0 + lag.sample(&mut rng).round() as u64;
        let tx = (x as i32 + dx) as u16;
        let ty = (y as i32 + dy) as u16;
        if rng.random::<f64>() >= unsupported {
            events.push(Event::new(x, y, t0, Polarity::On).with_label(Label::Noise));
        }
        events.push(Event::new(tx, ty, t1, Polarity::On).with_label(Label::Signal));
    }
    LabeledStream::from_unsorted(geometry, events).unwrap()
}

pub fn classes(out: &[bf2::Classification]) -> Vec<Label> {
    out.iter().map(|c| c.class).collect()
}
