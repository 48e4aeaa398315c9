//! Event data model, validation, and signal/noise stream mixing.
//!
//! An [`Event`] is one address-event quadruplet `(x, y, t, p)` with an optional
//! ground-truth [`Label`]. A [`LabeledStream`] owns a time-ordered sequence of
//! events together with the [`SensorGeometry`] they were recorded on; every
//! constructor checks coordinates and ordering instead of assuming them.

mod binary;
mod csv;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use self::binary::{read_binary, write_binary, BINARY_MAGIC, BINARY_VERSION};
pub use self::csv::{read_csv, write_csv};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Off,
    On,
}

impl Polarity {
    pub fn as_u8(self) -> u8 {
        match self {
            Polarity::Off => 0,
            Polarity::On => 1,
        }
    }

    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(Polarity::Off),
            1 => Some(Polarity::On),
            _ => None,
        }
    }
}

/// Ground truth for an event, and also the output class of every filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Noise,
    Signal,
}

impl Label {
    pub fn as_u8(self) -> u8 {
        match self {
            Label::Noise => 0,
            Label::Signal => 1,
        }
    }

    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(Label::Noise),
            1 => Some(Label::Signal),
            _ => None,
        }
    }

    pub fn is_signal(self) -> bool {
        self == Label::Signal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Event {
    pub x: u16,
    pub y: u16,
    /// Microseconds.
    pub t: u64,
    pub polarity: Polarity,
    pub label: Option<Label>,
}

impl Event {
    pub fn new(x: u16, y: u16, t: u64, polarity: Polarity) -> Self {
        Event {
            x,
            y,
            t,
            polarity,
            label: None,
        }
    }

    pub fn with_label(mut self, label: Label) -> Self {
        self.label = Some(label);
        self
    }
}

/// Sensor size in pixels. Both sides must be at least 3 so a full 3x3
/// neighbourhood fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SensorGeometry {
    width: u16,
    height: u16,
}

impl SensorGeometry {
    pub fn new(width: u16, height: u16) -> Result<Self> {
        if width < 3 || height < 3 {
            return Err(Error::Geometry(format!(
                "sensor must be at least 3x3, got {width}x{height}"
            )));
        }
        Ok(SensorGeometry { width, height })
    }

    /// Columns (C).
    pub fn width(&self) -> u16 {
        self.width
    }

    /// Rows (R).
    pub fn height(&self) -> u16 {
        self.height
    }

    pub fn pixels(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn contains(&self, x: u16, y: u16) -> bool {
        x < self.width && y < self.height
    }

    /// Row-major pixel index.
    #[inline]
    pub fn index(&self, x: u16, y: u16) -> usize {
        y as usize * self.width as usize + x as usize
    }

    pub(crate) fn check(&self, event: &Event) -> Result<()> {
        if self.contains(event.x, event.y) {
            Ok(())
        } else {
            Err(Error::Geometry(format!(
                "event at ({}, {}) outside {}",
                event.x, event.y, self
            )))
        }
    }
}

impl fmt::Display for SensorGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

impl FromStr for SensorGeometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (w, h) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| Error::Config(format!("geometry must look like 346x260, got {s:?}")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<u16>()
                .map_err(|_| Error::Config(format!("bad geometry dimension {v:?}")))
        };
        SensorGeometry::new(parse(w)?, parse(h)?)
    }
}

/// A validated, time-ordered event stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledStream {
    geometry: SensorGeometry,
    events: Vec<Event>,
}

impl LabeledStream {
    /// Wraps `events`, rejecting out-of-range coordinates and decreasing
    /// timestamps.
    pub fn new(geometry: SensorGeometry, events: Vec<Event>) -> Result<Self> {
        check_events(&geometry, &events)?;
        Ok(LabeledStream { geometry, events })
    }

    /// Like [`LabeledStream::new`] but stably sorts by timestamp first.
    pub fn from_unsorted(geometry: SensorGeometry, mut events: Vec<Event>) -> Result<Self> {
        events.sort_by_key(|e| e.t);
        Self::new(geometry, events)
    }

    pub fn empty(geometry: SensorGeometry) -> Self {
        LabeledStream {
            geometry,
            events: Vec::new(),
        }
    }

    pub fn geometry(&self) -> SensorGeometry {
        self.geometry
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Event> {
        self.events.iter()
    }

    /// Returns a copy with every event's label replaced by `label`.
    pub fn relabeled(&self, label: Label) -> Self {
        LabeledStream {
            geometry: self.geometry,
            events: self
                .events
                .iter()
                .map(|e| e.with_label(label))
                .collect(),
        }
    }

    pub fn is_fully_labeled(&self) -> bool {
        self.events.iter().all(|e| e.label.is_some())
    }

    /// `(signal, noise)` ground-truth counts; unlabeled events are not counted.
    pub fn label_counts(&self) -> (usize, usize) {
        self.events.iter().fold((0, 0), |(s, n), e| match e.label {
            Some(Label::Signal) => (s + 1, n),
            Some(Label::Noise) => (s, n + 1),
            None => (s, n),
        })
    }

    /// Span from the first to the last timestamp, in microseconds.
    pub fn duration(&self) -> u64 {
        match (self.events.first(), self.events.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0,
        }
    }
}

impl<'a> IntoIterator for &'a LabeledStream {
    type Item = &'a Event;
    type IntoIter = std::slice::Iter<'a, Event>;

    fn into_iter(self) -> Self::IntoIter {
        self.events.iter()
    }
}

fn check_events(geometry: &SensorGeometry, events: &[Event]) -> Result<()> {
    let mut previous = 0u64;
    for (index, e) in events.iter().enumerate() {
        geometry.check(e)?;
        if e.t < previous {
            return Err(Error::Order {
                index,
                previous,
                t: e.t,
            });
        }
        previous = e.t;
    }
    Ok(())
}

/// Merges a signal recording with a noise recording into one ground-truth
/// stream. Events from `signal` are labeled Signal, events from `noise` Noise.
/// On equal timestamps signal events come first; each side keeps its input
/// order.
pub fn mix_streams(signal: &LabeledStream, noise: &LabeledStream) -> Result<LabeledStream> {
    if signal.geometry != noise.geometry {
        return Err(Error::Geometry(format!(
            "cannot mix {} signal with {} noise",
            signal.geometry, noise.geometry
        )));
    }
    let (a, b) = (signal.events(), noise.events());
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i].t <= b[j].t {
            out.push(a[i].with_label(Label::Signal));
            i += 1;
        } else {
            out.push(b[j].with_label(Label::Noise));
            j += 1;
        }
    }
    out.extend(a[i..].iter().map(|e| e.with_label(Label::Signal)));
    out.extend(b[j..].iter().map(|e| e.with_label(Label::Noise)));
    Ok(LabeledStream {
        geometry: signal.geometry,
        events: out,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamFormat {
    Csv,
    Binary,
}

impl StreamFormat {
    /// `.csv` and `.txt` are text, everything else is the binary record format.
    pub fn from_path(path: &Path) -> Self {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref()
        {
            Some("csv") | Some("txt") => StreamFormat::Csv,
            _ => StreamFormat::Binary,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Required for CSV; checked against the header for binary files.
    pub geometry: Option<SensorGeometry>,
    /// Stably sort by timestamp instead of rejecting out-of-order input.
    pub sort: bool,
}

pub fn load_stream(path: &Path, format: StreamFormat, options: LoadOptions) -> Result<LabeledStream> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let (geometry, events) = match format {
        StreamFormat::Csv => {
            let geometry = options.geometry.ok_or_else(|| {
                Error::Config("CSV input needs an explicit sensor geometry".into())
            })?;
            let text = std::str::from_utf8(&bytes).map_err(|_| Error::Parse {
                line: 0,
                message: "file is not valid UTF-8".into(),
            })?;
            (geometry, read_csv(text)?.events)
        }
        StreamFormat::Binary => {
            let (geometry, events) = read_binary(&bytes)?;
            if let Some(expected) = options.geometry {
                if expected != geometry {
                    return Err(Error::Geometry(format!(
                        "file header says {geometry}, expected {expected}"
                    )));
                }
            }
            (geometry, events)
        }
    };
    if options.sort {
        LabeledStream::from_unsorted(geometry, events)
    } else {
        LabeledStream::new(geometry, events)
    }
}

pub fn save_stream(stream: &LabeledStream, path: &Path, format: StreamFormat) -> Result<()> {
    save_stream_with_comment(stream, path, format, None)
}

/// Saves `stream`; CSV output starts with `# <comment>` when one is given.
/// The binary format has no room for a comment and ignores it.
pub fn save_stream_with_comment(
    stream: &LabeledStream,
    path: &Path,
    format: StreamFormat,
    comment: Option<&str>,
) -> Result<()> {
    let bytes = match format {
        StreamFormat::Csv => {
            let mut out = String::new();
            write_csv(&mut out, stream.events(), comment, None);
            out.into_bytes()
        }
        StreamFormat::Binary => write_binary(stream),
    };
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
