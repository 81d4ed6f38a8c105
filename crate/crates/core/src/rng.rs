//! Seeded, platform-independent random streams.
//!
//! One root seed fans out into independent ChaCha8 streams keyed by a purpose
//! tag and any number of integer coordinates (sequence rank, instance index,
//! ...). Integer draws go through `u64` ranges so results never depend on the
//! width of `usize`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SolverRng = ChaCha8Rng;

pub mod purpose {
    pub const GENERATE: u64 = 0x6765_6e65;
    pub const MAP: u64 = 0x6d61_7073;
    pub const PIBT: u64 = 0x7069_6274;
    pub const LOCK: u64 = 0x6c6f_636b;
    pub const LNS: u64 = 0x6c6e_7373;
    pub const BENCH: u64 = 0x6265_6e63;
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Mixes a root seed with a purpose tag and coordinates into a child seed.
pub fn derive_seed(root: u64, purpose: u64, coords: &[u64]) -> u64 {
    let mut h = splitmix64(root ^ splitmix64(purpose));
    for &c in coords {
        h = splitmix64(h ^ splitmix64(c.wrapping_add(0x632b_e59b_d9b4_e019)));
    }
    h
}

pub fn stream(root: u64, purpose: u64, coords: &[u64]) -> SolverRng {
    SolverRng::seed_from_u64(derive_seed(root, purpose, coords))
}

/// Stable 64-bit hash of a short string, for keying streams by names.
pub fn name_key(name: &str) -> u64 {
    name.bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Uniform index in `0..n` (`n > 0`).
pub fn index<R: Rng + ?Sized>(rng: &mut R, n: usize) -> usize {
    debug_assert!(n > 0);
    rng.gen_range(0..n as u64) as usize
}

/// Fisher-Yates shuffle driven by [`index`].
pub fn shuffle<T, R: Rng + ?Sized>(rng: &mut R, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = index(rng, i + 1);
        items.swap(i, j);
    }
}

/// `k` distinct elements sampled uniformly without replacement, in draw order.
pub fn sample<T: Clone, R: Rng + ?Sized>(rng: &mut R, items: &[T], k: usize) -> Vec<T> {
    let mut pool: Vec<T> = items.to_vec();
    let k = k.min(pool.len());
    for i in 0..k {
        let j = i + index(rng, pool.len() - i);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}
