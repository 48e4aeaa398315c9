//! H3 universal hash family over packed pixel coordinates.
//!
//! Each function owns one random `index_bits`-wide word per key bit; the hash
//! of a key is the XOR of the words selected by the key's set bits. That makes
//! every function linear over XOR, `h(a ^ b) == h(a) ^ h(b)`, and means the
//! output is always an exact bit-slice in `[0, W)` for a power-of-two `W`.
//!
//! Table words come from SplitMix64 seeded with the family seed, drawn in
//! function order then key-bit order, so a `(K, W, seed)` triple always
//! yields the same family. Lookups go through four byte-indexed tables per
//! function, which is the same XOR sum evaluated eight bits at a time.

use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::error::{Error, Result};

/// Width of a packed `(x, y)` key.
pub const KEY_BITS: usize = 32;

/// `x` in the high half, `y` in the low half.
#[inline]
pub fn pack_key(x: u16, y: u16) -> u32 {
    (x as u32) << 16 | y as u32
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct H3Family {
    index_bits: u32,
    seed: u64,
    rows: Vec<[u32; KEY_BITS]>,
    bytes: Vec<[[u32; 256]; 4]>,
}

impl H3Family {
    /// `count` functions with range `[0, width)`. `width` must be a power of
    /// two between 2 and 2^31.
    pub fn new(count: usize, width: usize, seed: u64) -> Result<Self> {
        if count == 0 {
            return Err(Error::Config("hash family needs at least one function".into()));
        }
        if width < 2 || !width.is_power_of_two() || width > 1 << 31 {
            return Err(Error::Config(format!(
                "hash range must be a power of two in [2, 2^31], got {width}"
            )));
        }
        let index_bits = width.trailing_zeros();
        let mask = (width - 1) as u32;
        let mut rng = SplitMix64::seed_from_u64(seed);
        let rows: Vec<[u32; KEY_BITS]> = (0..count)
            .map(|_| std::array::from_fn(|_| rng.next_u64() as u32 & mask))
            .collect();
        let bytes = rows.iter().map(byte_tables).collect();
        Ok(H3Family {
            index_bits,
            seed,
            rows,
            bytes,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn width(&self) -> usize {
        1 << self.index_bits
    }

    pub fn index_bits(&self) -> u32 {
        self.index_bits
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The random word each key bit selects in function `i`.
    pub fn table(&self, i: usize) -> &[u32; KEY_BITS] {
        &self.rows[i]
    }

    #[inline]
    pub fn hash_key(&self, i: usize, key: u32) -> u32 {
        let t = &self.bytes[i];
        t[0][(key & 0xff) as usize]
            ^ t[1][((key >> 8) & 0xff) as usize]
            ^ t[2][((key >> 16) & 0xff) as usize]
            ^ t[3][(key >> 24) as usize]
    }

    #[inline]
    pub fn hash(&self, i: usize, x: u16, y: u16) -> u32 {
        self.hash_key(i, pack_key(x, y))
    }

    /// Reference evaluation, one key bit at a time.
    pub fn hash_key_bitwise(&self, i: usize, key: u32) -> u32 {
        self.rows[i]
            .iter()
            .enumerate()
            .filter(|(bit, _)| key >> bit & 1 == 1)
            .fold(0, |acc, (_, w)| acc ^ w)
    }
}

fn byte_tables(row: &[u32; KEY_BITS]) -> [[u32; 256]; 4] {
    let mut out = [[0u32; 256]; 4];
    for (lane, table) in out.iter_mut().enumerate() {
        for (v, slot) in table.iter_mut().enumerate() {
            *slot = (0..8)
                .filter(|b| v >> b & 1 == 1)
                .fold(0, |acc, b| acc ^ row[lane * 8 + b]);
        }
    }
    out
}
