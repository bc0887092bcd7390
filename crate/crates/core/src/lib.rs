//! Polarization-adjusted convolutional (PAC) and polar codes.
//!
//! Code construction, a shared successive-cancellation engine with partial
//! rewinding, SC / SC-list / stack / Fano decoders, distance-spectrum
//! analysis and a reproducible Monte-Carlo harness.
//!
//! ```
//! use std::sync::Arc;
//! use pactree::{CheckRule, CodeConfig, Decoder, FanoConfig, FanoDecoder};
//!
//! let code = Arc::new(CodeConfig::pac_rm(128, 64).build().unwrap());
//! let data = vec![1u8; 64];
//! let cw = code.encode(&data).unwrap();
//! let llrs: Vec<f64> = cw.x.iter().map(|&b| if b == 0 { 2.0 } else { -2.0 }).collect();
//!
//! let fano = FanoDecoder::new(code.clone(), FanoConfig::default(), CheckRule::MinSum);
//! let out = fano.decode(&llrs);
//! assert_eq!(code.data_bits(&out.v_hat), data);
//! ```

pub mod analysis;
pub mod channel;
pub mod code;
pub mod construction;
pub mod conv;
pub mod crc;
pub mod decoder;
pub mod error;
pub mod kernel;
pub mod metrics;
pub mod sim;

pub use code::{CodeConfig, CodeSpec, Codeword};
pub use construction::{CriticalSetMode, ProfileKind, RateProfile};
pub use conv::{conv_trans, GeneratorPolynomial};
pub use crc::CrcSpec;
pub use decoder::{
    DecodeOutput, Decoder, DecoderConfig, FanoConfig, FanoDecoder, ListDecoder, ScDecoder, StackConfig, StackDecoder,
};
pub use error::{Error, Result};
pub use kernel::{polar_transform, CheckRule, Counters, FactorGraphMemory};
pub use metrics::MetricKind;
pub use sim::{Campaign, SimRecord, StopRule};

// The guide's code blocks run as doc-tests.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/codes.md")]
    pub mod codes {}
    #[doc = include_str!("../../../book/src/engine.md")]
    pub mod engine {}
    #[doc = include_str!("../../../book/src/decoders.md")]
    pub mod decoders {}
    #[doc = include_str!("../../../book/src/spectrum.md")]
    pub mod spectrum {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    pub mod simulation {}
}
