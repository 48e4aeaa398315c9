mod common;

use bf2::events::{Event, Label, LabeledStream, Polarity, SensorGeometry};
use bf2::stcf::{process_stream, StcfParams};
use common::{uniform_stream, BinnedOracle};
use proptest::prelude::*;

fn stream_from(raw: Vec<(u16, u16, u64)>, g: SensorGeometry) -> LabeledStream {
    let mut t = 0;
    let events = raw
        .into_iter()
        .map(|(x, y, dt)| {
            t += dt;
            Event::new(x % g.width(), y % g.height(), t, Polarity::On)
        })
        .collect();
    LabeledStream::new(g, events).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Hashing can only add support, never remove it.
    #[test]
    fn support_never_below_oracle(
        raw in prop::collection::vec((0u16..24, 0u16..24, 0u64..30), 1..300),
        seed in any::<u64>(),
        width_bits in 3u32..10,
        s in 1u32..=3,
    ) {
        let g = SensorGeometry::new(24, 24).unwrap();
        let stream = stream_from(raw, g);
        let params = StcfParams::new(100, s, 1 << width_bits, 4, 4).unwrap();
        let out = process_stream(&stream, params, seed).unwrap();
        let mut oracle = BinnedOracle::new(g, params.bf2().tau_row(), 4, s);
        for (e, c) in stream.iter().zip(&out) {
            let exact = oracle.support_count(e);
            prop_assert!(c.support.unwrap() >= exact);
            if exact >= s {
                prop_assert_eq!(c.class, Label::Signal);
            }
        }
    }

    #[test]
    fn output_is_deterministic(raw in prop::collection::vec((0u16..24, 0u16..24, 0u64..30), 1..200), seed in any::<u64>()) {
        let g = SensorGeometry::new(24, 24).unwrap();
        let stream = stream_from(raw, g);
        let params = StcfParams::new(100, 1, 64, 4, 4).unwrap();
        prop_assert_eq!(process_stream(&stream, params, seed).unwrap(), process_stream(&stream, params, seed).unwrap());
    }
}

#[test]
fn wide_rows_match_the_oracle() {
    let g = SensorGeometry::new(128, 96).unwrap();
    let stream = uniform_stream(g, 20_000, 40_000, 11);
    let params = StcfParams::new(4000, 1, 1 << 16, 4, 4).unwrap();
    let out = process_stream(&stream, params, 3).unwrap();
    let oracle = BinnedOracle::run(g, params.bf2().tau_row(), 4, 1, &stream);
    let mismatches: Vec<usize> = (0..out.len()).filter(|&i| out[i].class != oracle[i]).collect();
    assert!(mismatches.len() * 1000 <= out.len());
    assert!(mismatches.iter().all(|&i| oracle[i] == Label::Noise));
}
