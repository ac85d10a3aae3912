//! Gray-labeled 16-QAM with unit average energy.
//!
//! Symbol index bits `[b3 b2]` select the in-phase level and `[b1 b0]` the
//! quadrature level. Per axis the Gray sequence `00, 01, 11, 10` maps to
//! levels `-3, -1, +1, +3`, scaled by `1/sqrt(10)`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ORDER: usize = 16;

/// `1/sqrt(10)`
pub const SCALE: f64 = 0.316_227_766_016_837_94;

/// Gray label of each axis level, in ascending level order.
const GRAY: [usize; 4] = [0b00, 0b01, 0b11, 0b10];

/// Axis level position (0..4) of a 2-bit Gray label.
const POSITION: [usize; 4] = [0, 1, 3, 2];

#[derive(Debug, Clone, PartialEq)]
pub struct QamMapper {
    constellation: [Complex64; ORDER],
}

impl Default for QamMapper {
    fn default() -> Self {
        Self::new()
    }
}

impl QamMapper {
    pub fn new() -> Self {
        let mut constellation = [Complex64::new(0.0, 0.0); ORDER];
        for (i, c) in constellation.iter_mut().enumerate() {
            *c = Complex64::new(axis_value(POSITION[i >> 2]), axis_value(POSITION[i & 3]));
        }
        Self { constellation }
    }

    pub fn constellation(&self) -> &[Complex64; ORDER] {
        &self.constellation
    }

    pub fn map(&self, index: usize) -> Complex64 {
        self.constellation[index]
    }

    pub fn map_all(&self, indices: &[usize]) -> Vec<Complex64> {
        indices.iter().map(|&i| self.map(i)).collect()
    }

    /// Minimum-distance decision.
    pub fn demap(&self, z: Complex64) -> usize {
        (GRAY[axis_decision(z.re)] << 2) | GRAY[axis_decision(z.im)]
    }

    pub fn demap_all(&self, zs: &[Complex64]) -> Vec<usize> {
        zs.iter().map(|&z| self.demap(z)).collect()
    }
}

fn axis_value(position: usize) -> f64 {
    (2.0 * position as f64 - 3.0) * SCALE
}

/// Nearest axis level position (0..4) for a received coordinate.
pub fn axis_decision(v: f64) -> usize {
    let t = v / SCALE;
    if t < -2.0 {
        0
    } else if t < 0.0 {
        1
    } else if t < 2.0 {
        2
    } else {
        3
    }
}

/// Uniform random symbol indices.
pub fn random_indices<R: Rng>(rng: &mut R, count: usize) -> Vec<usize> {
    (0..count).map(|_| rng.random_range(0..ORDER)).collect()
}

/// `count` seeded random symbols with their indices.
pub fn map_symbols(seed: u64, count: usize) -> (Vec<usize>, Vec<Complex64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let idx = random_indices(&mut rng, count);
    let syms = QamMapper::new().map_all(&idx);
    (idx, syms)
}
