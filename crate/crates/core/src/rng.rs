//! Counter-based random streams.
//!
//! Every draw is a pure function of `(key, counter)`:
//!
//! ```text
//! draw(key, counter) = fmix(key + (counter + 1) * 0x9E3779B97F4A7C15)   (wrapping u64)
//! fmix(z):  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!           z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!           z =  z ^ (z >> 31)
//! ```
//!
//! which is the SplitMix64 output function evaluated at an explicit counter,
//! so any language with wrapping 64-bit arithmetic reproduces the streams
//! bit for bit. Substreams are keyed by `fmix(key ^ fmix(index + 0xD1B54A32D192ED03))`.
//!
//! Conversions:
//! * uniform `f64` in `[0, 1)`: `(draw >> 11) * 2^-53`
//! * standard normal: Box-Muller on two consecutive uniforms,
//!   `sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`; the sine branch is discarded so
//!   each normal consumes exactly two counters.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const SUBSTREAM: u64 = 0xD1B5_4A32_D192_ED03;

#[inline]
pub fn fmix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A deterministic stream of 64-bit draws.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self { key: seed, counter: 0 }
    }

    /// Independent stream for `index` (trial number, restart number, ...).
    pub fn substream(&self, index: u64) -> Self {
        Self { key: fmix(self.key ^ fmix(index.wrapping_add(SUBSTREAM))), counter: 0 }
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        fmix(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Log-uniform in `[lo, hi]`, both positive.
    pub fn log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.uniform_in(lo.ln(), hi.ln()).exp()
    }

    /// Uniform integer in `[lo, hi]` inclusive.
    pub fn int_in(&mut self, lo: usize, hi: usize) -> usize {
        debug_assert!(lo <= hi);
        let span = (hi - lo + 1) as u64;
        lo + (self.next_u64() % span) as usize
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn normal_vec(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.normal()).collect()
    }

    /// Uniformly distributed unit vector.
    pub fn unit_vec(&mut self, len: usize) -> Vec<f64> {
        loop {
            let mut v = self.normal_vec(len);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                v.iter_mut().for_each(|x| *x /= norm);
                return v;
            }
        }
    }
}
