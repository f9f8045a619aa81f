//! Minimal deterministic RNG used by the generator and stress scenarios.
//!
//! SplitMix64 (Steele, Lea & Flood 2014): a 64-bit mixing recurrence with a
//! fully specified update, so identical seeds yield identical streams on any
//! platform. Normal deviates come from an Irwin-Hall sum of 12 uniforms,
//! which uses only additions and therefore stays portable; it has mean 0,
//! variance 1, and support bounded to (-6, 6), which is plenty for shaping
//! fixture noise.

#[derive(Debug, Clone)]
pub(crate) struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Derives an independent stream for substream `index` of `seed`.
    pub fn for_stream(seed: u64, index: u64) -> Self {
        let mut root = Self::new(seed);
        // Mix the substream index through one round so adjacent seeds and
        // adjacent indices do not produce correlated streams.
        let salt = root.next_u64() ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        Self::new(salt)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_bool(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Approximate standard normal: sum of 12 uniforms minus 6.
    pub fn next_normal(&mut self) -> f64 {
        let mut acc = 0.0;
        for _ in 0..12 {
            acc += self.next_f64();
        }
        acc - 6.0
    }

    /// Uniform integer in [0, bound) by rejection, bias-free.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let zone = u64::MAX - (u64::MAX - bound + 1) % bound;
        loop {
            let v = self.next_u64();
            if v <= zone {
                return v % bound;
            }
        }
    }

    /// Geometric length with the given mean (support {1, 2, ...}), via
    /// inversion of the CDF.
    pub fn next_geometric(&mut self, mean: f64) -> usize {
        if mean <= 1.0 {
            return 1;
        }
        let p = 1.0 / mean;
        let u = self.next_f64().max(f64::MIN_POSITIVE);
        let len = (u.ln() / (1.0 - p).ln()).floor() as usize + 1;
        len.max(1)
    }
}
