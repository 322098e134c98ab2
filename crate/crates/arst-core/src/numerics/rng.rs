//! Deterministic seeded random number generation.
//!
//! Everything random in this crate — parameter initialization, data
//! synthesis, shuffling — flows through [`SeededRng`] so that a run is a
//! pure function of its seeds. The generator is a hand-rolled SplitMix64:
//! the algorithm is tiny, fully specified here, and produces the same
//! `u64` stream on every platform, which is exactly the property the
//! reproducibility tests rely on. Uniform floats are derived from the
//! integer stream with arithmetic only; normal draws use the Box–Muller
//! transform.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// One SplitMix64 output step: advances `state` by the Weyl constant and
/// scrambles it through two xor-multiply rounds.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stateless scramble used to derive child seeds.
fn mix(v: u64) -> u64 {
    let mut s = v;
    splitmix64(&mut s)
}

/// Deterministic SplitMix64 generator.
///
/// Identical seeds yield identical draw streams on all platforms. Child
/// generators produced by [`SeededRng::derive`] depend only on the
/// original seed and the stream id, never on how many draws the parent
/// has made, so callers can hand out per-video streams in any order.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    state: u64,
}

impl SeededRng {
    /// Creates a generator from a seed.
    pub fn new(seed: u64) -> Self {
        SeededRng { seed, state: seed }
    }

    /// Seed this generator was created with.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derives an independent child generator for `stream`.
    ///
    /// Distinct stream ids give draw streams that do not overlap with each
    /// other or with the parent for any practical draw count.
    pub fn derive(&self, stream: u64) -> Self {
        let child = mix(self.seed ^ mix(stream.wrapping_add(1).wrapping_mul(GAMMA)));
        SeededRng::new(child)
    }

    /// Next raw 64-bit draw.
    pub fn next_u64(&mut self) -> u64 {
        splitmix64(&mut self.state)
    }

    /// Uniform draw in `[0, 1)` using the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `(0, 1]`; safe to pass to `ln`.
    pub fn next_f64_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal draw via Box–Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = self.next_f64_open();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform integer in `[0, n)` via the widening multiply-shift map.
    ///
    /// The bias of this map is below `n / 2^64`, negligible for the small
    /// `n` used here (shuffles, phase choices).
    pub fn next_below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "next_below requires n > 0");
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    /// In-place Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    /// Samples an index proportionally to `weights` (non-negative, not all
    /// zero). Returns the last strictly positive index if rounding pushes
    /// the draw past the cumulative total.
    pub fn choose_weighted(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        debug_assert!(total > 0.0, "choose_weighted requires positive total weight");
        let mut draw = self.next_f64() * total;
        let mut last_positive = 0;
        for (i, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                last_positive = i;
                if draw < w {
                    return i;
                }
                draw -= w;
            }
        }
        last_positive
    }
}
