//! Counter-based deterministic random number generation.
//!
//! Streams are keyed by `(seed, purpose tag, index)` and advance a 64-bit
//! counter through the SplitMix64 output function, so any draw is a pure
//! function of its key and position.  This makes datasets reproducible
//! across runs, platforms, and host languages: re-deriving a stream never
//! depends on how many values other streams consumed.
//!
//! Pinned constants (SplitMix64, Steele et al.):
//!   increment  0x9E3779B97F4A7C15
//!   mix 1      0xBF58476D1CE4E5B9
//!   mix 2      0x94D049BB133111EB
//!
//! Gaussian variates use the Box-Muller transform on two consecutive
//! uniforms, `z = sqrt(-2 ln(1-u1)) * cos(2*pi*u2)`, one variate per pair.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const MIX1: u64 = 0xBF58_476D_1CE4_E5B9;
const MIX2: u64 = 0x94D0_49BB_1331_11EB;

/// SplitMix64 output function.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(MIX1);
    z = (z ^ (z >> 27)).wrapping_mul(MIX2);
    z ^ (z >> 31)
}

/// Fold a byte string into a 64-bit key, one SplitMix64 step per byte.
fn fold_tag(seed: u64, tag: &str) -> u64 {
    let mut h = seed ^ GOLDEN;
    for &b in tag.as_bytes() {
        h = mix(h.wrapping_add(GOLDEN).wrapping_add(b as u64));
    }
    h
}

/// One independent substream of the generator.
#[derive(Debug, Clone)]
pub struct Stream {
    key: u64,
    counter: u64,
}

impl Stream {
    /// Stream for `(seed, tag, index)`.
    pub fn new(seed: u64, tag: &str, index: u64) -> Self {
        let key = mix(fold_tag(seed, tag).wrapping_add(index.wrapping_mul(GOLDEN)));
        Stream { key, counter: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        let v = mix(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)));
        self.counter += 1;
        v
    }

    /// Uniform draw in `[0, 1)` using the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `[lo, hi)`.
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal variate via Box-Muller (one variate per uniform pair).
    pub fn next_normal(&mut self) -> f64 {
        let u1 = self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform integer in `[0, n)`.
    pub fn next_index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        (self.next_f64() * n as f64) as usize % n
    }
}
