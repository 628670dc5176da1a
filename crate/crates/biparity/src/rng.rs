//! Counter-based random number generation for reproducible trajectories.
//!
//! Every draw is a pure function of `(key, counter)`: the SplitMix64 output
//! function applied to `key + (counter + 1) * GOLDEN`. There is no hidden
//! state beyond the counter, so streams can be replayed, split per
//! trajectory, and produce identical bit patterns regardless of thread
//! scheduling. Gaussian increments come from the Box–Muller transform of two
//! consecutive counter outputs.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Value of stream `key` at position `counter`.
#[inline]
pub fn u64_at(key: u64, counter: u64) -> u64 {
    mix64(key.wrapping_add(counter.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Per-trajectory seed derived from `(master_seed, trajectory_index)`.
///
/// Uses a separate mixing domain from the in-trajectory stream so trajectory
/// keys never collide with draw positions.
pub fn trajectory_seed(master_seed: u64, index: u64) -> u64 {
    u64_at(master_seed ^ 0x7472_616A_5F69_6478, index)
}

/// Counter-based generator with a convenience cursor.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(key: u64) -> Self {
        CounterRng { key, counter: 0 }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let v = u64_at(self.key, self.counter);
        self.counter += 1;
        v
    }

    /// Uniform draw in the half-open interval [0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw: Box–Muller on two counter outputs.
    ///
    /// The first uniform is shifted into (0, 1] so the logarithm is finite.
    #[inline]
    pub fn normal(&mut self) -> f64 {
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Wiener increment for one timestep: Normal(0, dt).
    #[inline]
    pub fn wiener(&mut self, dt: f64) -> f64 {
        self.normal() * dt.sqrt()
    }
}
