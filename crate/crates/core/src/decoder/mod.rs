//! SC-family decoders sharing one factor-graph engine and counter model.

mod fano;
mod sc;
mod stack;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use fano::{FanoConfig, FanoDecoder, FanoOutput};
pub use sc::{ml_bound_event, sc_decode, Candidate, ListDecoder, ScDecoder};
pub use stack::{StackConfig, StackDecoder};

use crate::code::CodeSpec;
use crate::kernel::{CheckRule, Counters, FactorGraphMemory};

/// Result of decoding one frame.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodeOutput {
    /// Estimated pre-transform input `v`.
    pub v_hat: Vec<u8>,
    pub counters: Counters,
    /// False when the decoder gave up (abort guard); the frame then counts
    /// as an error.
    pub converged: bool,
}

pub trait Decoder: Send + Sync {
    fn decode(&self, llrs: &[f64]) -> DecodeOutput;
}

/// Serialisable decoder selection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DecoderConfig {
    Sc,
    Scl {
        list_size: usize,
        /// Pick the best CRC-passing path when the code carries a CRC.
        #[serde(default = "yes")]
        crc_aided: bool,
    },
    Stack(StackConfig),
    Fano(FanoConfig),
}

fn yes() -> bool {
    true
}

impl DecoderConfig {
    pub fn build(&self, code: Arc<CodeSpec>, rule: CheckRule) -> Box<dyn Decoder> {
        match self {
            DecoderConfig::Sc => Box::new(ScDecoder::new(code, rule)),
            DecoderConfig::Scl { list_size, crc_aided } => {
                Box::new(ListDecoder::new(code, *list_size, rule).crc_aided(*crc_aided))
            }
            DecoderConfig::Stack(cfg) => Box::new(StackDecoder::new(code, cfg.clone(), rule)),
            DecoderConfig::Fano(cfg) => Box::new(FanoDecoder::new(code, cfg.clone(), rule)),
        }
    }

    pub fn label(&self) -> String {
        match self {
            DecoderConfig::Sc => "sc".into(),
            DecoderConfig::Scl { list_size, .. } => format!("scl-{list_size}"),
            DecoderConfig::Stack(c) => format!("stack-{}", c.depth),
            DecoderConfig::Fano(_) => "fano".into(),
        }
    }
}

/// Decision LLR of bit `i`, moving the memory's counters into `acc`.
#[inline]
pub(crate) fn decision_llr(mem: &mut FactorGraphMemory, i: usize, acc: &mut Counters) -> f64 {
    let llr = mem.update_llrs(i);
    acc.add(std::mem::take(&mut mem.counters));
    llr
}
