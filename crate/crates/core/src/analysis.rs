//! Distance spectra, union bounds and genie-aided error statistics.

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::code::CodeSpec;
use crate::construction::{q_function, row_weight};
use crate::conv::{conv_output, conv_step};
use crate::decoder::ListDecoder;
use crate::error::{Error, Result};
use crate::kernel::{CheckRule, FactorGraphMemory};
use crate::metrics::hard_decision;
use crate::sim::{make_frame, ordered_frames};

/// Multiplicities `A_d` of nonzero codeword weights.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightSpectrum {
    pub counts: BTreeMap<usize, u64>,
}

impl WeightSpectrum {
    pub fn d_min(&self) -> Option<usize> {
        self.counts.keys().next().copied()
    }

    pub fn count(&self, d: usize) -> u64 {
        self.counts.get(&d).copied().unwrap_or(0)
    }

    /// Entries with weight at most `max_weight`.
    pub fn truncated(&self, max_weight: usize) -> WeightSpectrum {
        WeightSpectrum { counts: self.counts.range(..=max_weight).map(|(&d, &a)| (d, a)).collect() }
    }
}

fn pack(x: &[u8]) -> Vec<u64> {
    let mut words = vec![0u64; x.len().div_ceil(64)];
    for (k, &b) in x.iter().enumerate() {
        words[k / 64] |= u64::from(b) << (k % 64);
    }
    words
}

fn weight(words: &[u64]) -> usize {
    words.iter().map(|w| w.count_ones() as usize).sum()
}

/// Exact spectrum by enumerating all `2^K` messages (`K <= 24`).
pub fn exhaustive_spectrum(code: &CodeSpec) -> Result<WeightSpectrum> {
    let k = code.data_len();
    if k > 24 {
        return Err(Error::TooLarge(k));
    }
    let rows: Vec<Vec<u64>> = (0..k)
        .map(|b| {
            let mut d = vec![0u8; k];
            d[b] = 1;
            code.encode(&d).map(|cw| pack(&cw.x))
        })
        .collect::<Result<_>>()?;
    let mut word = vec![0u64; code.block_len().div_ceil(64)];
    let mut counts = BTreeMap::new();
    // Gray-code walk: each step flips one message bit.
    for step in 1u64..(1u64 << k) {
        let flip = step.trailing_zeros() as usize;
        for (w, r) in word.iter_mut().zip(&rows[flip]) {
            *w ^= r;
        }
        *counts.entry(weight(&word)).or_insert(0) += 1;
    }
    counts.remove(&0);
    Ok(WeightSpectrum { counts })
}

/// Low-weight codewords found by list decoding the noiseless all-zero word
/// with one injected nonzero bit.
///
/// For every information position `p` whose row weight is at most twice the
/// minimum distance, the decoder is forced to `v_i = 0` before `p` and
/// `v_p = 1`; every survivor is re-encoded. Codewords are deduplicated
/// globally and weights up to `2 d_min` are reported. Counts are lower bounds
/// that grow with `list_size`.
pub fn spectrum_scl(code: &CodeSpec, list_size: usize) -> WeightSpectrum {
    let info = code.profile().info_set().to_vec();
    if info.is_empty() {
        return WeightSpectrum::default();
    }
    let decoder = ListDecoder::new(Arc::new(code.clone()), list_size, CheckRule::MinSum).crc_aided(false);
    let llrs = vec![1.0; code.block_len()];
    let w_min = info.iter().map(|&p| row_weight(p)).min().expect("nonempty");

    let search = |positions: &[usize], bound: usize| -> HashSet<Vec<u64>> {
        positions
            .par_iter()
            .map(|&p| {
                let mut forced: Vec<Option<u8>> = vec![None; code.block_len()];
                for &q in info.iter().take_while(|&&q| q < p) {
                    forced[q] = Some(0);
                }
                forced[p] = Some(1);
                let (list, _) = decoder.decode_list(&llrs, Some(&forced));
                list.iter()
                    .map(|c| pack(&code.codeword_of(&c.v)))
                    .filter(|w| weight(w) <= bound)
                    .collect::<HashSet<_>>()
            })
            .reduce(HashSet::new, |mut a, b| {
                a.extend(b);
                a
            })
    };

    let mut limit = 2 * w_min;
    let first: Vec<usize> = info.iter().copied().filter(|&p| row_weight(p) <= limit).collect();
    let mut found = search(&first, 2 * limit);
    let d_min = found.iter().map(|w| weight(w)).min().unwrap_or(limit);
    if 2 * d_min > limit {
        let more: Vec<usize> =
            info.iter().copied().filter(|&p| row_weight(p) > limit && row_weight(p) <= 2 * d_min).collect();
        limit = 2 * d_min;
        found.extend(search(&more, limit));
    }
    let d_min = found.iter().map(|w| weight(w)).min().unwrap_or(limit);
    let mut counts = BTreeMap::new();
    for w in &found {
        let d = weight(w);
        if d <= 2 * d_min {
            *counts.entry(d).or_insert(0) += 1;
        }
    }
    WeightSpectrum { counts }
}

/// Truncated union bound `A_dmin Q(sqrt(2 d_min R Eb/N0))` on the ML block
/// error probability.
pub fn union_bound_fer(spectrum: &WeightSpectrum, rate: f64, ebn0_db: f64) -> f64 {
    match spectrum.d_min() {
        Some(d) => {
            let ebn0 = 10f64.powf(ebn0_db / 10.0);
            spectrum.count(d) as f64 * q_function((2.0 * d as f64 * rate * ebn0).sqrt())
        }
        None => 0.0,
    }
}

/// Error statistics collected with a genie that corrects every wrong
/// information decision of SC decoding.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GenieHistogram {
    /// Number of corrections per failed frame, mapped to frame counts.
    pub counts: BTreeMap<usize, u64>,
    pub failures: u64,
    pub frames: u64,
    /// Information-set index of the first correction of each failure.
    pub first_errors: Vec<usize>,
}

impl GenieHistogram {
    /// Share of failures with at most `b` channel-induced errors.
    pub fn fraction_at_most(&self, b: usize) -> f64 {
        if self.failures == 0 {
            return 0.0;
        }
        self.counts.range(..=b).map(|(_, &c)| c).sum::<u64>() as f64 / self.failures as f64
    }
}

/// Corrections made by genie-aided SC on one frame, as information-set
/// indices.
pub fn genie_corrections(code: &CodeSpec, llrs: &[f64], v_true: &[u8], rule: CheckRule) -> Vec<usize> {
    let g = code.g();
    let profile = code.profile();
    let mut mem = FactorGraphMemory::new(llrs.to_vec(), rule).expect("channel length is a power of two");
    let mut state = g.initial_state();
    let mut fixes = Vec::new();
    let mut j = 0;
    for i in 0..code.block_len() {
        let llr = mem.update_llrs(i);
        let v = if profile.is_info(i) {
            let decided = hard_decision(llr) ^ conv_output(0, &state, g);
            if decided != v_true[i] {
                fixes.push(j);
            }
            j += 1;
            v_true[i]
        } else {
            0
        };
        let u = conv_step(v, &mut state, g);
        mem.update_partial_sums(i, u);
    }
    fixes
}

/// Collects `target_failures` frames on which SC needs at least one genie
/// correction (or stops after `max_frames`).
pub fn genie_error_histogram(
    code: &CodeSpec,
    ebn0_db: f64,
    target_failures: u64,
    seed: u64,
    max_frames: u64,
) -> GenieHistogram {
    let mut hist = GenieHistogram::default();
    if target_failures == 0 {
        return hist;
    }
    ordered_frames(
        max_frames,
        |f| {
            let frame = make_frame(code, ebn0_db, seed, f);
            genie_corrections(code, &frame.llrs, &frame.v, CheckRule::MinSum)
        },
        |fixes| {
            hist.frames += 1;
            if let Some(&first) = fixes.first() {
                hist.failures += 1;
                *hist.counts.entry(fixes.len()).or_insert(0) += 1;
                hist.first_errors.push(first);
            }
            hist.failures < target_failures
        },
    );
    hist
}
