//! Cyclic redundancy checks over bit vectors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A CRC generator `g(x)` of degree `r` with zero init and no final XOR.
///
/// Coefficients are stored highest degree first, including the implicit
/// leading 1, so `poly.len() == r + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CrcSpec {
    poly: Vec<u8>,
}

impl CrcSpec {
    /// From the low-order coefficient bits with an implicit `x^width` term,
    /// e.g. `from_low_bits(0xA6, 8)` is `x^8 + x^7 + x^5 + x^2 + x`.
    pub fn from_low_bits(bits: u64, width: usize) -> Result<Self> {
        if width == 0 || width > 63 {
            return Err(Error::InvalidArgument(format!("CRC width {width} out of range")));
        }
        if bits >> width != 0 {
            return Err(Error::InvalidArgument(format!("0x{bits:X} does not fit in {width} bits")));
        }
        let mut poly = vec![1u8];
        poly.extend((0..width).rev().map(|k| (bits >> k & 1) as u8));
        Ok(Self { poly })
    }

    /// From a hex literal such as `"0xA6"`; the width is four bits per digit.
    pub fn from_hex(text: &str) -> Result<Self> {
        let t = text.trim();
        let digits = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")).unwrap_or(t);
        let bits = u64::from_str_radix(digits, 16).map_err(|_| Error::Parse(format!("bad CRC literal \"{text}\"")))?;
        Self::from_low_bits(bits, 4 * digits.len())
    }

    /// From an explicit binary string, highest degree first, including the
    /// leading 1 (`"110100111"` is `0xA7` with width 8).
    pub fn from_binary(text: &str) -> Result<Self> {
        let poly: Vec<u8> = text
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Parse(format!("'{c}' is not a binary digit"))),
            })
            .collect::<Result<_>>()?;
        if poly.len() < 2 || poly[0] != 1 {
            return Err(Error::Parse("CRC polynomial needs a leading 1 and degree >= 1".into()));
        }
        Ok(Self { poly })
    }

    /// The 8-bit generator `0xA6`.
    pub fn a6() -> Self {
        Self::from_low_bits(0xA6, 8).expect("valid constant")
    }

    pub fn width(&self) -> usize {
        self.poly.len() - 1
    }

    /// Coefficients, highest degree first.
    pub fn poly(&self) -> &[u8] {
        &self.poly
    }

    /// Remainder of `d(x) x^r` divided by `g(x)`, highest degree first.
    pub fn compute(&self, data: &[u8]) -> Vec<u8> {
        let r = self.width();
        let mut reg = vec![0u8; r];
        for &bit in data {
            let feedback = bit ^ reg[0];
            reg.rotate_left(1);
            reg[r - 1] = 0;
            if feedback == 1 {
                for (x, &g) in reg.iter_mut().zip(&self.poly[1..]) {
                    *x ^= g;
                }
            }
        }
        reg
    }

    /// `data` followed by its CRC.
    pub fn append(&self, data: &[u8]) -> Vec<u8> {
        let mut out = data.to_vec();
        out.extend(self.compute(data));
        out
    }

    /// True when the trailing `r` bits equal the CRC of the rest.
    pub fn check(&self, with_crc: &[u8]) -> bool {
        let r = self.width();
        if with_crc.len() < r {
            return false;
        }
        let (data, crc) = with_crc.split_at(with_crc.len() - r);
        self.compute(data) == crc
    }
}

impl fmt::Display for CrcSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.poly {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl FromStr for CrcSpec {
    type Err = Error;
    /// Accepts `0x..` hex literals or explicit binary strings.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.starts_with("0x") || t.starts_with("0X") {
            Self::from_hex(t)
        } else {
            Self::from_binary(t)
        }
    }
}

impl TryFrom<String> for CrcSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<CrcSpec> for String {
    fn from(c: CrcSpec) -> String {
        c.to_string()
    }
}
