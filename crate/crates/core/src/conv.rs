//! Rate-1 convolutional pre-transform.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients `g_0..g_m` of a generator polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct GeneratorPolynomial {
    coeffs: Vec<u8>,
}

impl GeneratorPolynomial {
    /// Builds a polynomial from explicit taps. `g_0` must be 1 so that the
    /// transform is invertible.
    pub fn new(coeffs: Vec<u8>) -> Result<Self> {
        if coeffs.first() != Some(&1) {
            return Err(Error::InvalidArgument("generator polynomial needs g0 = 1".into()));
        }
        if coeffs.iter().any(|&c| c > 1) {
            return Err(Error::InvalidArgument("generator coefficients must be binary".into()));
        }
        Ok(Self { coeffs })
    }

    /// `g = [1]`: the pre-transform is the identity and the code is a plain
    /// polar code.
    pub fn identity() -> Self {
        Self { coeffs: vec![1] }
    }

    /// Parses an octal literal such as `"133"` or `"0o133"`; the binary
    /// expansion read most-significant bit first gives `g_0, g_1, ...`.
    pub fn parse_octal(text: &str) -> Result<Self> {
        let digits = text.trim();
        let digits = digits
            .strip_prefix("0o")
            .or_else(|| digits.strip_prefix("0O"))
            .unwrap_or(digits);
        if digits.is_empty() {
            return Err(Error::Parse("empty octal literal".into()));
        }
        let mut bits = Vec::with_capacity(3 * digits.len());
        for ch in digits.chars() {
            let d = ch
                .to_digit(8)
                .ok_or_else(|| Error::Parse(format!("'{ch}' is not an octal digit in \"{text}\"")))?;
            bits.extend([(d >> 2) & 1, (d >> 1) & 1, d & 1].map(|b| b as u8));
        }
        let first = bits
            .iter()
            .position(|&b| b == 1)
            .ok_or_else(|| Error::Parse(format!("\"{text}\" is the zero polynomial")))?;
        Self::new(bits.split_off(first))
    }

    pub fn coeffs(&self) -> &[u8] {
        &self.coeffs
    }

    /// Memory `m`.
    pub fn memory(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn constraint_length(&self) -> usize {
        self.coeffs.len()
    }

    /// Octal rendering, the inverse of [`parse_octal`](Self::parse_octal).
    pub fn to_octal(&self) -> String {
        let pad = (3 - self.coeffs.len() % 3) % 3;
        let bits: Vec<u8> = std::iter::repeat_n(0, pad).chain(self.coeffs.iter().copied()).collect();
        bits.chunks(3)
            .map(|c| char::from(b'0' + (c[0] << 2 | c[1] << 1 | c[2])))
            .collect()
    }

    pub fn initial_state(&self) -> ConvState {
        ConvState { bits: vec![0; self.memory()] }
    }
}

impl FromStr for GeneratorPolynomial {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse_octal(s)
    }
}

impl fmt::Display for GeneratorPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_octal())
    }
}

impl TryFrom<String> for GeneratorPolynomial {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        Self::parse_octal(&s)
    }
}

impl From<GeneratorPolynomial> for String {
    fn from(g: GeneratorPolynomial) -> String {
        g.to_octal()
    }
}

/// Shift-register contents, newest input first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ConvState {
    pub bits: Vec<u8>,
}

/// One step of the shift register: returns the output bit and the next state.
pub fn conv_1b_trans(v: u8, state: &ConvState, g: &GeneratorPolynomial) -> (u8, ConvState) {
    let mut next = state.clone();
    let u = conv_step(v, &mut next, g);
    (u, next)
}

/// In-place form of [`conv_1b_trans`].
#[inline]
pub fn conv_step(v: u8, state: &mut ConvState, g: &GeneratorPolynomial) -> u8 {
    let u = conv_output(v, state, g);
    let len = state.bits.len();
    if len > 0 {
        state.bits.copy_within(..len - 1, 1);
        state.bits[0] = v;
    }
    u
}

/// Output bit for input `v` without advancing the state.
#[inline]
pub fn conv_output(v: u8, state: &ConvState, g: &GeneratorPolynomial) -> u8 {
    let mut u = v & g.coeffs[0];
    for (s, c) in state.bits.iter().zip(&g.coeffs[1..]) {
        u ^= s & c;
    }
    u
}

/// `u_i = Σ_j g_j v_{i-j}` over GF(2).
pub fn conv_trans(v: &[u8], g: &GeneratorPolynomial) -> Vec<u8> {
    let mut state = g.initial_state();
    v.iter().map(|&b| conv_step(b, &mut state, g)).collect()
}

/// Upper-triangular Toeplitz generator matrix; row `i` carries `g` starting
/// at column `i`.
pub fn toeplitz_matrix(g: &GeneratorPolynomial, n: usize) -> Vec<Vec<u8>> {
    (0..n)
        .map(|i| {
            let mut row = vec![0u8; n];
            for (j, &c) in g.coeffs.iter().enumerate() {
                if i + j < n {
                    row[i + j] = c;
                }
            }
            row
        })
        .collect()
}
