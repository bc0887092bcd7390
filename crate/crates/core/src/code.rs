//! Complete description of a PAC or polar code and its encoder.

use serde::{Deserialize, Serialize};

use crate::construction::{CriticalSetMode, ProfileKind, RateProfile};
use crate::conv::{conv_trans, GeneratorPolynomial};
use crate::crc::CrcSpec;
use crate::error::{Error, Result};
use crate::kernel::polar_transform_in_place;

/// Buildable, serialisable code description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeConfig {
    pub block_len: usize,
    /// Data bits per frame, excluding CRC bits.
    pub data_len: usize,
    pub profile: ProfileKind,
    pub g: GeneratorPolynomial,
    #[serde(default)]
    pub crc: Option<CrcSpec>,
    /// Design Eb/N0 used for the Fano bias tables.
    #[serde(default = "default_bias_snr")]
    pub bias_snr_db: f64,
    #[serde(default)]
    pub critical_set: CriticalSetMode,
}

fn default_bias_snr() -> f64 {
    4.0
}

impl CodeConfig {
    /// PAC code with an RM profile (ties broken at 3.5 dB), `g = 133`.
    pub fn pac_rm(block_len: usize, data_len: usize) -> Self {
        Self {
            block_len,
            data_len,
            profile: ProfileKind::Rm { design_snr_db: 3.5 },
            g: GeneratorPolynomial::parse_octal("133").expect("valid constant"),
            crc: None,
            bias_snr_db: default_bias_snr(),
            critical_set: CriticalSetMode::default(),
        }
    }

    /// Same profile with the identity pre-transform.
    pub fn polar_rm(block_len: usize, data_len: usize) -> Self {
        Self { g: GeneratorPolynomial::identity(), ..Self::pac_rm(block_len, data_len) }
    }

    pub fn build(&self) -> Result<CodeSpec> {
        let r = self.crc.as_ref().map_or(0, CrcSpec::width);
        let info_len = self.data_len + r;
        let info = self.profile.info_set(self.block_len, info_len)?;
        let profile = RateProfile::new(self.block_len, info, self.bias_snr_db)?.with_critical_mode(self.critical_set);
        CodeSpec::new(profile, self.g.clone(), self.crc.clone())
    }
}

/// Encoder output at every stage of the chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codeword {
    /// Data (and CRC) embedded in the rate profile.
    pub v: Vec<u8>,
    /// After the convolutional pre-transform.
    pub u: Vec<u8>,
    /// After the polar transform.
    pub x: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CodeSpec {
    profile: RateProfile,
    g: GeneratorPolynomial,
    crc: Option<CrcSpec>,
}

impl CodeSpec {
    pub fn new(profile: RateProfile, g: GeneratorPolynomial, crc: Option<CrcSpec>) -> Result<Self> {
        let r = crc.as_ref().map_or(0, CrcSpec::width);
        if profile.info_len() < r {
            return Err(Error::InvalidArgument(format!(
                "{} information positions cannot hold a {r}-bit CRC",
                profile.info_len()
            )));
        }
        Ok(Self { profile, g, crc })
    }

    pub fn block_len(&self) -> usize {
        self.profile.block_len()
    }

    /// `K`, data bits per frame.
    pub fn data_len(&self) -> usize {
        self.profile.info_len() - self.crc_len()
    }

    /// Information positions, `K + r`.
    pub fn info_len(&self) -> usize {
        self.profile.info_len()
    }

    pub fn crc_len(&self) -> usize {
        self.crc.as_ref().map_or(0, CrcSpec::width)
    }

    /// Rate seen by the channel, `(K + r) / N`.
    pub fn rate(&self) -> f64 {
        self.info_len() as f64 / self.block_len() as f64
    }

    pub fn profile(&self) -> &RateProfile {
        &self.profile
    }

    pub fn g(&self) -> &GeneratorPolynomial {
        &self.g
    }

    pub fn crc(&self) -> Option<&CrcSpec> {
        self.crc.as_ref()
    }

    /// Message, optional CRC, rate-profile embedding, pre-transform, polar
    /// transform.
    pub fn encode(&self, data: &[u8]) -> Result<Codeword> {
        if data.len() != self.data_len() {
            return Err(Error::MessageLength { got: data.len(), expected: self.data_len() });
        }
        let info = match &self.crc {
            Some(c) => c.append(data),
            None => data.to_vec(),
        };
        let v = self.embed(&info);
        let u = conv_trans(&v, &self.g);
        let mut x = u.clone();
        polar_transform_in_place(&mut x);
        Ok(Codeword { v, u, x })
    }

    /// Places information bits at the information positions, zeros elsewhere.
    pub fn embed(&self, info: &[u8]) -> Vec<u8> {
        let mut v = vec![0u8; self.block_len()];
        for (&pos, &b) in self.profile.info_set().iter().zip(info) {
            v[pos] = b;
        }
        v
    }

    /// Information bits of `v` (data followed by CRC).
    pub fn info_bits(&self, v: &[u8]) -> Vec<u8> {
        self.profile.info_set().iter().map(|&i| v[i]).collect()
    }

    /// Data bits of `v`, CRC dropped.
    pub fn data_bits(&self, v: &[u8]) -> Vec<u8> {
        let mut bits = self.info_bits(v);
        bits.truncate(self.data_len());
        bits
    }

    /// True when `v` carries a valid CRC, or when the code has none.
    pub fn crc_ok(&self, v: &[u8]) -> bool {
        match &self.crc {
            Some(c) => c.check(&self.info_bits(v)),
            None => true,
        }
    }

    /// Codeword `x` for a full `v`.
    pub fn codeword_of(&self, v: &[u8]) -> Vec<u8> {
        let mut x = conv_trans(v, &self.g);
        polar_transform_in_place(&mut x);
        x
    }
}
