mod common;

use bf2::theory::fpr_row;
use bf2::{Bf2, Bf2Config, ClearMode};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ops() -> impl Strategy<Value = Vec<(u16, u16, u64)>> {
    prop::collection::vec((0u16..64, 0u16..64, 0u64..40), 1..120)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn stored_items_stay_visible_for_the_window(raw in ops(), seed in any::<u64>(), depth in 2usize..6) {
        let config = Bf2Config::new(64, depth, 3, 25).unwrap();
        let mut store = Bf2::new(config, seed).unwrap();
        let mut t = 0;
        let mut inserted: Vec<(u16, u16, u64)> = Vec::new();
        for (x, y, dt) in raw {
            t += dt;
            store.insert(x, y, t).unwrap();
            inserted.push((x, y, t));
            let bin = t / 25;
            for &(px, py, pt) in &inserted {
                if bin - pt / 25 < depth as u64 {
                    prop_assert!(store.contains(px, py));
                    prop_assert!(store.search(px, py).any());
                }
            }
        }
    }

    #[test]
    fn everything_expires_after_depth_bins(raw in ops(), seed in any::<u64>()) {
        let config = Bf2Config::new(256, 4, 4, 10).unwrap();
        let mut store = Bf2::new(config, seed).unwrap();
        let mut t = 0;
        for (x, y, dt) in raw {
            t += dt;
            store.insert(x, y, t).unwrap();
        }
        store.advance_to((t / 10 + 4) * 10).unwrap();
        prop_assert!(store.is_empty());
    }

    #[test]
    fn same_inputs_same_state(raw in ops(), seed in any::<u64>()) {
        let config = Bf2Config::new(128, 4, 4, 10).unwrap();
        let mut a = Bf2::new(config, seed).unwrap();
        let mut b = Bf2::new(config, seed).unwrap();
        let mut t = 0;
        for (x, y, dt) in raw {
            t += dt;
            a.insert(x, y, t).unwrap();
            b.insert(x, y, t).unwrap();
        }
        prop_assert_eq!(a.occupancy(), b.occupancy());
    }

    #[test]
    fn literal_mode_never_loses_the_current_bin(raw in ops(), seed in any::<u64>()) {
        let config = Bf2Config::new(64, 3, 2, 10).unwrap();
        let mut store = Bf2::new(config, seed).unwrap().with_clear_mode(ClearMode::Literal);
        let mut t = 0;
        let mut current: Vec<(u16, u16)> = Vec::new();
        let mut bin = None;
        for (x, y, dt) in raw {
            t += dt;
            if bin != Some(t / 10) {
                current.clear();
                bin = Some(t / 10);
            }
            store.insert(x, y, t).unwrap();
            current.push((x, y));
            for &(px, py) in &current {
                prop_assert!(store.contains(px, py));
            }
        }
    }
}

/// Active row after a jump holds only events of the current bin.
#[test]
fn active_row_holds_only_current_bin() {
    let config = Bf2Config::new(1024, 4, 4, 100).unwrap();
    let mut store = Bf2::new(config, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for i in 0..200 {
        store.insert(rng.random_range(0..300), rng.random_range(0..300), i * 7).unwrap();
    }
    let before = store.occupancy();
    let t = 200 * 7 + 100;
    store.advance_to(t).unwrap();
    let row = store.row_ptr();
    for bank in store.occupancy() {
        assert_eq!(bank[row], 0);
    }
    store.insert(5, 5, t).unwrap();
    for bank in store.occupancy() {
        assert_eq!(bank[row], 1);
    }
    assert_ne!(before, store.occupancy());
}

#[test]
fn row_fill_matches_expectation() {
    let (w, n) = (4096usize, 3000usize);
    let config = Bf2Config::new(w, 2, 4, 1_000_000).unwrap();
    let mut fills = Vec::new();
    for seed in 0..20u64 {
        let mut store = Bf2::new(config, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let mut keys = std::collections::HashSet::new();
        while keys.len() < n {
            keys.insert((rng.random_range(0..u16::MAX), rng.random_range(0..u16::MAX)));
        }
        for (x, y) in keys {
            store.insert(x, y, 0).unwrap();
        }
        for bank in store.occupancy() {
            fills.push(bank[store.row_ptr()] as f64);
        }
    }
    let expected = w as f64 * (1.0 - (-(n as f64) / w as f64).exp());
    let mean = fills.iter().sum::<f64>() / fills.len() as f64;
    let var = fills.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (fills.len() - 1) as f64;
    let se = (var / fills.len() as f64).sqrt();
    assert!((mean - expected).abs() <= 3.0 * se + 1.0, "mean {mean} vs {expected} (se {se})");
}

#[test]
fn single_row_false_positive_rate() {
    let (w, n, k) = (2048usize, 1500usize, 4usize);
    let config = Bf2Config::new(w, 2, k, 1_000_000).unwrap();
    let mut rates = Vec::new();
    for seed in 0..40u64 {
        let mut store = Bf2::new(config, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + seed);
        let mut keys = std::collections::HashSet::new();
        while keys.len() < n {
            keys.insert((rng.random_range(0..u16::MAX), rng.random_range(0..u16::MAX)));
        }
        for &(x, y) in &keys {
            store.insert(x, y, 0).unwrap();
        }
        let mut hits = 0;
        let mut queries = 0;
        while queries < 4000 {
            let q = (rng.random_range(0..u16::MAX), rng.random_range(0..u16::MAX));
            if keys.contains(&q) {
                continue;
            }
            queries += 1;
            hits += store.contains(q.0, q.1) as u32;
        }
        rates.push(hits as f64 / queries as f64);
    }
    let predicted = fpr_row(n as u64, w, k);
    let mean = rates.iter().sum::<f64>() / rates.len() as f64;
    let var = rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (rates.len() - 1) as f64;
    let se = (var / rates.len() as f64).sqrt();
    assert!((mean - predicted).abs() <= 3.0 * se, "mean {mean} vs {predicted} (se {se})");
}
