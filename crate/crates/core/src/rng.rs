//! Per-concern random streams derived from one master seed.
//!
//! Every concern owns a separate ChaCha stream, so two policies run on the
//! same seed see the same obstacle layout and the same process noise no
//! matter how many measurement or fading draws each of them makes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Layout = 1,
    ProcessNoise = 2,
    Measurement = 3,
    Fading = 4,
    ObstacleDetection = 5,
    Exploration = 6,
    Replay = 7,
    Init = 8,
}

pub fn stream(seed: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}
