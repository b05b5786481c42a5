//! Deterministic counter-based random streams.
//!
//! Every consumer asks for `stream(seed, purpose, index)`; the result does
//! not depend on thread count or on the order in which streams are built.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const STREAM_SAMPLES: u64 = 1;
pub const STREAM_VERTICES: u64 = 2;
pub const STREAM_PROBES: u64 = 3;
pub const STREAM_DIRECTIONS: u64 = 4;
pub const STREAM_REFERENCE: u64 = 5;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream(seed: u64, purpose: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed ^ splitmix(purpose)));
    rng.set_stream(splitmix(index.wrapping_add(purpose << 40)));
    rng
}
