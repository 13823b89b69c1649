//! Seeded random-number plumbing.
//!
//! Every random quantity in a run flows from one user-supplied `u64` seed
//! through named substreams, so that identical configurations reproduce
//! bit-identical artifacts and so that consumers of different substreams
//! never share draws.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Independent random streams of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Substream {
    /// Quadrature draws from the state's marginal.
    Sampling,
    /// Vacuum draws for the dark pulse of each frame.
    Vacuum,
    /// Electronic noise added to every trace sample.
    Noise,
    /// Trigger dark-count decisions and their replacement vacuum draws.
    DarkCounts,
    /// Vacuum-only frames of the LO-power sweep.
    ShotNoise,
}

impl Substream {
    fn tag(self) -> u64 {
        match self {
            Substream::Sampling => 0x73616d706c696e67,   // "sampling"
            Substream::Vacuum => 0x76616375756d2e2e,     // "vacuum.."
            Substream::Noise => 0x6e6f6973652e2e2e,      // "noise..."
            Substream::DarkCounts => 0x6461726b636e7473, // "darkcnts"
            Substream::ShotNoise => 0x73686f746e6f6973,  // "shotnois"
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn keyed_rng(a: u64, b: u64) -> ChaCha12Rng {
    let mut state = a ^ b.rotate_left(32);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

/// The RNG of one named substream of a run.
pub fn substream(seed: u64, stream: Substream) -> ChaCha12Rng {
    keyed_rng(seed, stream.tag())
}

/// Derived child seed for shard `index` of a partitioned computation.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    let mut state = seed ^ index.rotate_left(17) ^ 0xa5a5a5a5deadbeef;
    splitmix64(&mut state)
}

/// Standard normal draws by the Marsaglia polar method.
///
/// Pairs are generated together; the spare is cached so consecutive calls
/// on the same source stay cheap and fully deterministic.
#[derive(Debug, Clone)]
pub struct NormalSource {
    spare: Option<f64>,
}

impl NormalSource {
    pub fn new() -> Self {
        NormalSource { spare: None }
    }

    pub fn sample<R: Rng>(&mut self, rng: &mut R) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u: f64 = 2.0 * rng.gen::<f64>() - 1.0;
            let v: f64 = 2.0 * rng.gen::<f64>() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = libm::sqrt(-2.0 * libm::log(s) / s);
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }
}

impl Default for NormalSource {
    fn default() -> Self {
        Self::new()
    }
}
