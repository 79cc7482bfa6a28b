//! Counter-based splittable pseudo-random streams.
//!
//! Every trial in an experiment draws from its own stream, derived purely
//! from `(master_seed, trial_index)`. Replaying a trial therefore never
//! depends on scheduling order or worker count, which is what makes the
//! batch runners reproducible under any degree of parallelism.
//!
//! The generator is SplitMix64: a 64-bit Weyl sequence pushed through an
//! avalanching finalizer. Each stream gets its own additive constant
//! (gamma), so distinct streams are distinct sequences, not offsets into a
//! shared one.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Stafford "variant 13" finalizer. Full avalanche on 64 bits.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a per-stream increment: odd, and rejected if its bit pattern is
/// too regular (fewer than 24 bit transitions).
#[inline]
fn mix_gamma(z: u64) -> u64 {
    let mut g = (z ^ (z >> 33)).wrapping_mul(0xFF51_AFD7_ED55_8CCD);
    g = (g ^ (g >> 33)).wrapping_mul(0xC4CE_B9FE_1A85_EC53);
    g = (g ^ (g >> 33)) | 1;
    if (g ^ (g >> 1)).count_ones() < 24 {
        g ^ 0xAAAA_AAAA_AAAA_AAAA
    } else {
        g
    }
}

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
    gamma: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 {
            state: mix64(seed),
            gamma: mix_gamma(seed.wrapping_add(GOLDEN_GAMMA)),
        }
    }

    /// Stream keyed by `(key, counter)` alone; independent of call order.
    pub fn from_key_counter(key: u64, counter: u64) -> Self {
        let salt = mix64(counter.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
        SplitMix64::new(key ^ salt)
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(self.gamma);
        mix64(self.state)
    }

    /// Uniform on [0, 1): 53 random mantissa bits, so strictly below 1.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Bernoulli(p). Exact at the endpoints: p = 0 never fires, p = 1 always.
    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Uniform in 0..n via 128-bit multiply-shift. `n` must be nonzero.
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        (((self.next_u64() as u128) * (n as u128)) >> 64) as u64
    }

    /// Fair unit step from the top bit.
    #[inline]
    pub fn sign(&mut self) -> i8 {
        if self.next_u64() >> 63 == 0 {
            1
        } else {
            -1
        }
    }
}

/// Factory for per-trial streams under one master seed.
#[derive(Debug, Clone, Copy)]
pub struct Streams {
    master_seed: u64,
}

impl Streams {
    pub fn new(master_seed: u64) -> Self {
        Streams { master_seed }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream(&self, index: u64) -> SplitMix64 {
        SplitMix64::from_key_counter(self.master_seed, index)
    }
}
