//! Synthetic event streams with exact ground truth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::events::{Event, Label, LabeledStream, Polarity, SensorGeometry};

/// Default shot-noise rate per pixel, in Hz.
pub const DEFAULT_NOISE_RATE: f64 = 5.0;

fn poisson_count(rng: &mut ChaCha8Rng, mean: f64) -> Result<u64> {
    if !mean.is_finite() || mean < 0.0 {
        return Err(Error::Config(format!("invalid Poisson mean {mean}")));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    let d = Poisson::new(mean).map_err(|e| Error::Config(e.to_string()))?;
    Ok(d.sample(rng) as u64)
}

fn polarity(rng: &mut ChaCha8Rng) -> Polarity {
    if rng.random::<bool>() {
        Polarity::On
    } else {
        Polarity::Off
    }
}

/// Uncorrelated background activity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub geometry: SensorGeometry,
    /// Events per pixel per second.
    pub rate_hz: f64,
    pub duration_us: u64,
    pub seed: u64,
}

/// Independent Poisson processes at every pixel, merged in time order and
/// labelled noise.
pub fn gen_shot_noise(spec: &NoiseSpec) -> Result<LabeledStream> {
    if !spec.rate_hz.is_finite() || spec.rate_hz < 0.0 {
        return Err(Error::Config(format!("noise rate must be non-negative, got {}", spec.rate_hz)));
    }
    let g = spec.geometry;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mean = spec.rate_hz * g.pixels() as f64 * spec.duration_us as f64 * 1e-6;
    let n = if spec.duration_us == 0 { 0 } else { poisson_count(&mut rng, mean)? };
    let mut events: Vec<Event> = (0..n)
        .map(|_| {
            let x = rng.random_range(0..g.width());
            let y = rng.random_range(0..g.height());
            let t = rng.random_range(0..spec.duration_us);
            Event::new(x, y, t, polarity(&mut rng)).with_label(Label::Noise)
        })
        .collect();
    events.sort_by_key(|e| e.t);
    LabeledStream::new(g, events)
}

/// Direction a bar is stretched along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Spans rows and moves along x.
    Vertical,
    /// Spans columns and moves along y.
    Horizontal,
}

/// A straight bar sweeping across the sensor at constant speed. Positions
/// wrap around the sensor edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeSpec {
    pub orientation: Orientation,
    /// Position of the bar's low side along the motion axis at t = 0, in pixels.
    pub position: f64,
    /// Pixels per second; the sign gives the direction.
    pub velocity: f64,
    /// Extent along the motion axis, in pixels.
    pub thickness: u16,
    /// First pixel covered along the bar.
    pub start: u16,
    /// Pixels covered along the bar, clipped at the sensor edge.
    pub length: u16,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub geometry: SensorGeometry,
    pub edges: Vec<EdgeSpec>,
    pub duration_us: u64,
    /// Extra events per covered pixel per second while a bar sits on it.
    pub interior_rate_hz: f64,
    /// Edge events are delayed by a uniform draw from `[0, jitter_us]`.
    pub jitter_us: u64,
    pub seed: u64,
}

impl SceneSpec {
    /// Two bars crossing the sensor, one in each orientation.
    pub fn demo(geometry: SensorGeometry, duration_us: u64, seed: u64) -> Self {
        let (w, h) = (geometry.width(), geometry.height());
        SceneSpec {
            geometry,
            edges: vec![
                EdgeSpec {
                    orientation: Orientation::Vertical,
                    position: 0.0,
                    velocity: 1500.0,
                    thickness: 3,
                    start: h / 4,
                    length: h / 3,
                },
                EdgeSpec {
                    orientation: Orientation::Horizontal,
                    position: h as f64 * 0.75,
                    velocity: -1200.0,
                    thickness: 2,
                    start: w / 3,
                    length: w / 3,
                },
            ],
            duration_us,
            interior_rate_hz: 20.0,
            jitter_us: 300,
            seed,
        }
    }
}

struct Crossing {
    line: u16,
    t: f64,
    covers: bool,
}

/// Times in `[0, duration)` at which a boundary starting at `b0` and moving
/// at `v` px/us passes a pixel centre, paired with that pixel's line index.
fn boundary_crossings(b0: f64, v: f64, duration: f64, modulus: u16, covers: bool, out: &mut Vec<Crossing>) {
    if v == 0.0 {
        return;
    }
    let end = b0 + v * duration;
    let (lo, hi) = if v > 0.0 { (b0, end) } else { (end, b0) };
    let first = (lo - 0.5).ceil() as i64;
    let last = (hi - 0.5).floor() as i64;
    for m in first..=last {
        let t = (m as f64 + 0.5 - b0) / v;
        if (0.0..duration).contains(&t) {
            out.push(Crossing {
                line: m.rem_euclid(modulus as i64) as u16,
                t,
                covers,
            });
        }
    }
}

/// Whether the pixel-centre line `line` is inside the bar at `p0`.
fn covered_at_start(line: u16, p0: f64, thickness: u16, modulus: u16) -> bool {
    let d = (line as f64 + 0.5 - p0).rem_euclid(modulus as f64);
    d < thickness as f64
}

/// Events from moving bars, all labelled signal. A bar emits one ON event
/// per pixel as its leading side arrives, one OFF event as its trailing side
/// leaves, and Poisson events at `interior_rate_hz` while it covers a pixel.
pub fn gen_scene(spec: &SceneSpec) -> Result<LabeledStream> {
    let g = spec.geometry;
    if !spec.interior_rate_hz.is_finite() || spec.interior_rate_hz < 0.0 {
        return Err(Error::Config("interior rate must be non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let duration = spec.duration_us as f64;
    let mut events = Vec::new();
    for edge in &spec.edges {
        if edge.thickness == 0 || !edge.velocity.is_finite() || !edge.position.is_finite() {
            return Err(Error::Config("edges need a finite position and velocity and nonzero thickness".into()));
        }
        let (modulus, along) = match edge.orientation {
            Orientation::Vertical => (g.width(), g.height()),
            Orientation::Horizontal => (g.height(), g.width()),
        };
        if edge.thickness > modulus {
            return Err(Error::Config("edge thicker than the sensor".into()));
        }
        let span = edge.start..edge.start.saturating_add(edge.length).min(along);
        let v = edge.velocity * 1e-6;
        let (low, high) = (edge.position, edge.position + edge.thickness as f64);
        let mut crossings = Vec::new();
        boundary_crossings(high, v, duration, modulus, v > 0.0, &mut crossings);
        boundary_crossings(low, v, duration, modulus, v < 0.0, &mut crossings);
        crossings.sort_by(|a, b| a.t.total_cmp(&b.t));

        let pixel = |line: u16, k: u16| match edge.orientation {
            Orientation::Vertical => (line, k),
            Orientation::Horizontal => (k, line),
        };
        let mut since: Vec<Option<f64>> = (0..modulus)
            .map(|l| covered_at_start(l, edge.position, edge.thickness, modulus).then_some(0.0))
            .collect();
        let mut intervals = Vec::new();
        for c in &crossings {
            let p = if c.covers { Polarity::On } else { Polarity::Off };
            for k in span.clone() {
                let t = (c.t + rng.random_range(0.0..=spec.jitter_us as f64)).floor() as u64;
                if t < spec.duration_us {
                    let (x, y) = pixel(c.line, k);
                    events.push(Event::new(x, y, t, p).with_label(Label::Signal));
                }
            }
            let slot = &mut since[c.line as usize];
            match (c.covers, *slot) {
                (true, None) => *slot = Some(c.t),
                (false, Some(a)) => {
                    intervals.push((c.line, a, c.t));
                    *slot = None;
                }
                _ => {}
            }
        }
        for (line, a) in since.iter().enumerate() {
            if let Some(a) = a {
                intervals.push((line as u16, *a, duration));
            }
        }
        for (line, a, b) in intervals {
            for k in span.clone() {
                let n = poisson_count(&mut rng, spec.interior_rate_hz * (b - a) * 1e-6)?;
                for _ in 0..n {
                    let t = rng.random_range(a..b).floor() as u64;
                    let (x, y) = pixel(line, k);
                    events.push(Event::new(x, y, t, polarity(&mut rng)).with_label(Label::Signal));
                }
            }
        }
    }
    events.sort_by_key(|e| e.t);
    LabeledStream::new(g, events)
}
