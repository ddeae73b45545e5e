//! Seeded randomness.
//!
//! Every stochastic operator takes an injected generator. Runs use ChaCha8
//! seeded from a `u64`, so the seed plus the stream position fully determine
//! what comes next.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type RunRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> RunRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Position in the ChaCha stream, for checkpointing.
pub fn stream_position(rng: &RunRng) -> u128 {
    rng.get_word_pos()
}

pub fn restore(seed: u64, position: u128) -> RunRng {
    let mut rng = seeded(seed);
    rng.set_word_pos(position);
    rng
}

/// Standard normal sample (Box-Muller).
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // 1 - u keeps the log argument in (0, 1].
    let u1 = 1.0 - rng.gen::<f64>();
    let u2 = rng.gen::<f64>();
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(core::f64::consts::TAU * u2)
}

pub fn uniform<R: Rng + ?Sized>(rng: &mut R, half_width: f64) -> f64 {
    (rng.gen::<f64>() * 2.0 - 1.0) * half_width
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn restore_resumes_stream() {
        let mut a = seeded(11);
        for _ in 0..37 {
            a.gen::<u64>();
        }
        let pos = stream_position(&a);
        let mut b = restore(11, pos);
        for _ in 0..100 {
            assert_eq!(a.gen::<u64>(), b.gen::<u64>());
        }
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = seeded(3);
        let n = 20000;
        let xs: alloc::vec::Vec<f64> = (0..n).map(|_| gaussian(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.03, "{mean}");
        assert!((var - 1.0).abs() < 0.05, "{var}");
    }
}
