//! Portable counter-based random number generation.
//!
//! The generator is SplitMix64: a 64-bit Weyl counter followed by a fixed
//! avalanche mix. The update rule is written out below so the stream can be
//! reproduced bit-for-bit in any language:
//!
//! ```text
//! state += 0x9E3779B97F4A7C15                  (wrapping)
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9     (wrapping)
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB     (wrapping)
//! output = z ^ (z >> 31)
//! ```
//!
//! Uniform doubles take the top 53 bits of the output; Gaussians use the
//! Box–Muller transform on a pair of uniforms, emitting the cosine branch
//! first and caching the sine branch for the next call.

/// Counter-based RNG with a documented update rule.
///
/// One `Rng` per logical stream; never share one stream between consumers.
/// Derive substreams with [`derive_seed`] instead of reusing a seed.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
    cached_gauss: Option<f64>,
}

const WEYL: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng {
            state: seed,
            cached_gauss: None,
        }
    }

    /// Next raw 64-bit output.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(WEYL);
        mix(self.state)
    }

    /// Uniform in `[0, 1)`, using the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal draw (Box–Muller, cosine branch first).
    pub fn next_gauss(&mut self) -> f64 {
        if let Some(z) = self.cached_gauss.take() {
            return z;
        }
        // u1 in (0, 1] so the log is finite.
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let phi = 2.0 * std::f64::consts::PI * u2;
        self.cached_gauss = Some(r * phi.sin());
        r * phi.cos()
    }
}

/// Derives a child seed from a master seed and a textual stream tag.
///
/// Rule: `mix(master ^ fnv1a64(tag))` with `mix` the SplitMix64 finalizer.
/// Streams keyed by distinct tags are independent of one another, so adding
/// a new stream (a new β, a new experiment) never perturbs existing ones.
pub fn derive_seed(master: u64, tag: &str) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in tag.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    mix(master ^ h)
}

/// `d` iid draws from `N(0, sigma^2)`.
pub fn gauss_vec(rng: &mut Rng, d: usize, sigma: f64) -> Vec<f64> {
    assert!(sigma >= 0.0, "sigma must be non-negative");
    if sigma == 0.0 {
        return vec![0.0; d];
    }
    (0..d).map(|_| sigma * rng.next_gauss()).collect()
}
