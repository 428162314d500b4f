//! Seeded randomness. Every generic constant of a run is drawn from one
//! ChaCha stream so runs are reproducible from the seed alone.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{CMat, CVec, C64};

pub type RunRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> RunRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream for sub-task `index` of a run.
pub fn derived_rng(seed: u64, stream: u64, index: u64) -> RunRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ index);
    rng
}

/// `exp(2πiθ)` with θ uniform on [0, 1).
pub fn random_unit(rng: &mut impl Rng) -> C64 {
    C64::from_polar(1.0, TAU * rng.random::<f64>())
}

/// Uniform sample from the closed unit disk.
pub fn random_polydisk(rng: &mut impl Rng) -> C64 {
    C64::from_polar(rng.random::<f64>().sqrt(), TAU * rng.random::<f64>())
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMat {
    let mut m = CMat::zeros(rows, cols);
    // row-major draw order, independent of nalgebra's storage order
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = random_polydisk(rng);
        }
    }
    m
}

pub fn random_vector(rng: &mut impl Rng, len: usize) -> CVec {
    CVec::from_iterator(len, (0..len).map(|_| random_polydisk(rng)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_draws_have_modulus_one() {
        let mut rng = seeded_rng(9);
        for _ in 0..100 {
            assert!((random_unit(&mut rng).norm() - 1.0).abs() < 1e-15);
            assert!(random_polydisk(&mut rng).norm() <= 1.0);
        }
    }

    #[test]
    fn same_seed_same_stream() {
        let a = random_matrix(&mut seeded_rng(4), 3, 2);
        let b = random_matrix(&mut seeded_rng(4), 3, 2);
        assert_eq!(a, b);
        let c = random_matrix(&mut derived_rng(4, 1, 0), 3, 2);
        let d = random_matrix(&mut derived_rng(4, 1, 1), 3, 2);
        assert_ne!(c, d);
    }
}
