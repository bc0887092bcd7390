//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_bits(rng: &mut ChaCha8Rng, len: usize) -> Vec<u8> {
    (0..len).map(|_| rng.random_range(0..2u8)).collect()
}

pub fn random_llrs(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-4.0..4.0)).collect()
}

/// Strong LLRs pointing at `x`.
pub fn noiseless_llrs(x: &[u8]) -> Vec<f64> {
    x.iter().map(|&b| if b == 0 { 8.0 } else { -8.0 }).collect()
}

/// Explicit `n`-fold Kronecker power of `[[1,0],[1,1]]`.
pub fn kronecker_matrix(n: usize) -> Vec<Vec<u8>> {
    let mut m = vec![vec![1u8]];
    for _ in 0..n {
        let size = m.len();
        let mut next = vec![vec![0u8; 2 * size]; 2 * size];
        for r in 0..size {
            for c in 0..size {
                next[r][c] = m[r][c];
                next[size + r][c] = m[r][c];
                next[size + r][size + c] = m[r][c];
            }
        }
        m = next;
    }
    m
}

/// Row vector times matrix over GF(2).
pub fn gf2_mul(v: &[u8], m: &[Vec<u8>]) -> Vec<u8> {
    let mut out = vec![0u8; m[0].len()];
    for (bit, row) in v.iter().zip(m) {
        if *bit == 1 {
            for (o, r) in out.iter_mut().zip(row) {
                *o ^= r;
            }
        }
    }
    out
}

pub fn polar_encode(u: &[u8]) -> Vec<u8> {
    gf2_mul(u, &kronecker_matrix(u.len().trailing_zeros() as usize))
}

/// `u_i = Σ_j g_j v_{i-j}` over GF(2).
pub fn convolve(v: &[u8], g: &[u8]) -> Vec<u8> {
    (0..v.len())
        .map(|i| {
            g.iter()
                .enumerate()
                .filter(|&(j, _)| j <= i)
                .fold(0u8, |acc, (j, &gj)| acc ^ (gj & v[i - j]))
        })
        .collect()
}

/// Remainder of `msg(x) x^r` by `poly` (highest degree first, leading 1
/// included), computed by schoolbook long division.
pub fn crc_long_division(msg: &[u8], poly: &[u8]) -> Vec<u8> {
    let r = poly.len() - 1;
    let mut work = msg.to_vec();
    work.extend(std::iter::repeat_n(0, r));
    for i in 0..msg.len() {
        if work[i] == 1 {
            for (k, &p) in poly.iter().enumerate() {
                work[i + k] ^= p;
            }
        }
    }
    work[msg.len()..].to_vec()
}

fn min_sum(a: f64, b: f64) -> f64 {
    let m = a.abs().min(b.abs());
    if (a < 0.0) != (b < 0.0) {
        -m
    } else {
        m
    }
}

/// Decision LLR of bit `i` by textbook recursive SC over the channel LLRs,
/// given the decisions `u[..i]`. Min-sum check nodes.
pub fn sc_decision_llr(channel: &[f64], u: &[u8], i: usize) -> f64 {
    let len = channel.len();
    if len == 1 {
        return channel[0];
    }
    let half = len / 2;
    let (top, bottom) = channel.split_at(half);
    if i < half {
        let child: Vec<f64> = top.iter().zip(bottom).map(|(&a, &b)| min_sum(a, b)).collect();
        sc_decision_llr(&child, u, i)
    } else {
        let partial = polar_encode(&u[..half]);
        let child: Vec<f64> = top
            .iter()
            .zip(bottom)
            .zip(&partial)
            .map(|((&a, &b), &p)| if p == 0 { b + a } else { b - a })
            .collect();
        sc_decision_llr(&child, &u[half..], i - half)
    }
}

/// Per-bit error rate of genie-aided SC for the all-zero word of a polar
/// code of length `n` on BPSK/AWGN with noise deviation `sigma`.
pub fn genie_bit_error_rates(n: usize, sigma: f64, frames: usize, seed: u64) -> Vec<f64> {
    use rand_distr::{Distribution, Normal};
    let mut rng = rng(seed);
    let noise = Normal::new(0.0, sigma).unwrap();
    let zeros = vec![0u8; n];
    let mut errors = vec![0usize; n];
    for _ in 0..frames {
        let llrs: Vec<f64> = (0..n).map(|_| 2.0 * (1.0 + noise.sample(&mut rng)) / (sigma * sigma)).collect();
        for (i, e) in errors.iter_mut().enumerate() {
            if sc_decision_llr(&llrs, &zeros, i) <= 0.0 {
                *e += 1;
            }
        }
    }
    errors.iter().map(|&e| e as f64 / frames as f64).collect()
}
