//! Event-camera background-activity filtering with a two-dimensional Bloom
//! filter (BF2), plus the baselines, analytic models and tooling used to
//! evaluate it.

pub mod baselines;
pub mod bf2;
pub mod cli;
pub mod error;
pub mod events;
pub mod filter;
pub mod hash;
pub mod metrics;
pub mod plot;
pub mod resources;
pub mod stcf;
pub mod synth;
pub mod theory;

pub use bf2::{Bf2, Bf2Config, ClearMode, SearchResult};
pub use error::{Error, Result};
pub use events::{Event, Label, LabeledStream, Polarity, SensorGeometry};
pub use filter::{Classification, EventFilter, FilterConfig, FilterKind, Knob};
pub use stcf::{Bf2Stcf, StcfParams};
