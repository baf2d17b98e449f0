//! Deterministic seed fan-out. Every random stream in a run is derived from
//! one master seed plus a path of stream tags, so results never depend on
//! evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub const STREAM_GRAPH: u64 = 0x0067_7261_7068;
pub const STREAM_OBSTACLES: u64 = 0x6f62_7374;
pub const STREAM_ROUTE: u64 = 0x0072_6f75_7465;
pub const STREAM_PATH: u64 = 0x7061_7468;
pub const STREAM_REPEAT: u64 = 0x7265_7065_6174;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a sequence of tags into `seed`.
pub fn derive(seed: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(seed), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

pub fn rng(seed: u64, tags: &[u64]) -> Rng {
    Rng::seed_from_u64(derive(seed, tags))
}
