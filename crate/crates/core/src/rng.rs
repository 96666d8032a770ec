//! Counter-based source of the unit-rate exponential environment.
//!
//! The draw at site `(i, j)` is a pure function of `(seed, i, j)`: ChaCha8 is
//! keyed by the seed, the row `j` selects the stream and the column `i` the
//! word position. Nothing has to be stored, and environments at different
//! scales or under different fields share the same realisation.

use rand_chacha::ChaCha8Rng;
use rand_core::{Rng, SeedableRng};

/// Maps 64 random bits to a uniform in `(0, 1]` using the top 53 bits.
#[inline]
pub fn unit_open_closed(bits: u64) -> f64 {
    ((bits >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[derive(Clone, Debug)]
pub struct ExpSource {
    base: ChaCha8Rng,
}

impl ExpSource {
    pub fn new(seed: u64) -> Self {
        ExpSource {
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn positioned(&self, i: u64, j: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(j);
        rng.set_word_pos(2 * u128::from(i));
        rng
    }

    /// Uniform `U` in `(0, 1]` at site `(i, j)`.
    pub fn uniform(&self, i: u64, j: u64) -> f64 {
        unit_open_closed(self.positioned(i, j).next_u64())
    }

    /// Exp(1) draw `-ln U` at site `(i, j)`.
    pub fn exp1(&self, i: u64, j: u64) -> f64 {
        -self.uniform(i, j).ln()
    }

    /// Fills `out[k]` with the Exp(1) draw at site `(i0 + k, j)`.
    pub fn fill_row(&self, j: u64, i0: u64, out: &mut [f64]) {
        let mut rng = self.positioned(i0, j);
        for v in out.iter_mut() {
            *v = -unit_open_closed(rng.next_u64()).ln();
        }
    }
}
