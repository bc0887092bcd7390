//! BPSK over the binary-input AWGN channel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::construction::noise_variance;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub ebn0_db: f64,
    pub rate: f64,
    pub seed: u64,
}

impl ChannelParams {
    pub fn new(ebn0_db: f64, rate: f64, seed: u64) -> Self {
        Self { ebn0_db, rate, seed }
    }

    pub fn sigma(&self) -> f64 {
        noise_variance(self.ebn0_db, self.rate).sqrt()
    }

    /// Random stream dedicated to one frame. The stream depends only on the
    /// seed and the frame index, so frames can be generated in any order.
    pub fn frame_rng(&self, frame: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(frame);
        rng
    }
}

/// `0 -> +1`, `1 -> -1`.
pub fn bpsk_modulate(x: &[u8]) -> Vec<f64> {
    x.iter().map(|&b| if b == 0 { 1.0 } else { -1.0 }).collect()
}

/// Adds white Gaussian noise of standard deviation `sigma` drawn from `rng`.
pub fn transmit<R: Rng + ?Sized>(s: &[f64], sigma: f64, rng: &mut R) -> Vec<f64> {
    s.iter()
        .map(|&v| {
            let n: f64 = rng.sample(StandardNormal);
            v + sigma * n
        })
        .collect()
}

/// `λ_i = 2 y_i / σ²`.
pub fn channel_llrs(y: &[f64], sigma: f64) -> Vec<f64> {
    let scale = 2.0 / (sigma * sigma);
    y.iter().map(|&v| scale * v).collect()
}

/// Draws `len` uniform bits.
pub fn random_bits<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<u8> {
    (0..len).map(|_| rng.random::<bool>() as u8).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modulation() {
        assert_eq!(bpsk_modulate(&[0, 1, 0]), vec![1.0, -1.0, 1.0]);
        assert_eq!(bpsk_modulate(&[0; 4]), vec![1.0; 4]);
    }

    #[test]
    fn sigma_closed_form() {
        assert!((ChannelParams::new(0.0, 0.5, 1).sigma() - 1.0).abs() < 1e-15);
        assert_eq!(channel_llrs(&[1.0, 0.0], 1.0), vec![2.0, 0.0]);
    }

    #[test]
    fn zero_noise_is_identity() {
        let p = ChannelParams::new(0.0, 0.5, 3);
        let s = bpsk_modulate(&[0, 1, 1, 0]);
        assert_eq!(transmit(&s, 0.0, &mut p.frame_rng(0)), s);
    }

    #[test]
    fn frames_are_reproducible() {
        let p = ChannelParams::new(1.0, 0.5, 42);
        let s = vec![1.0; 64];
        let a = transmit(&s, p.sigma(), &mut p.frame_rng(7));
        let b = transmit(&s, p.sigma(), &mut p.frame_rng(7));
        let c = transmit(&s, p.sigma(), &mut p.frame_rng(8));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn empirical_variance() {
        let p = ChannelParams::new(2.0, 0.5, 9);
        let sigma = p.sigma();
        let y = transmit(&vec![0.0; 1_000_000], sigma, &mut p.frame_rng(0));
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / y.len() as f64;
        assert!((var / (sigma * sigma) - 1.0).abs() < 0.01);
    }
}
