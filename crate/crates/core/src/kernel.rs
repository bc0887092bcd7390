//! Polar transform and the successive-cancellation factor-graph engine.
//!
//! Stages are numbered from the decision side: stage 0 holds the single
//! decision LLR of the bit being decoded and stage `n` holds the channel
//! LLRs. Intermediate stage `s < n` holds `2^s` values, so all intermediate
//! stages together occupy exactly `N - 1` slots. Partial sums use the same
//! layout: the `2^s` bits at slot `s` are the re-encoded left sibling that
//! the g-node producing stage `s` consumes.
//!
//! Decoding is in natural bit order with `x = u P^{⊗n}`, `P = [[1,0],[1,1]]`,
//! so the upper half of a node's LLRs belongs to `enc(u_L) ⊕ enc(u_R)` and the
//! lower half to `enc(u_R)`.
//!
//! Stage buffers are reference counted and copied on first write. Cloning a
//! memory is therefore cheap, which is what list and stack decoders rely on;
//! the observable behaviour is plain value semantics.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Applies `P^{⊗n}` over GF(2). The transform is its own inverse.
pub fn polar_transform(u: &[u8]) -> Result<Vec<u8>> {
    if u.is_empty() || !u.len().is_power_of_two() {
        return Err(Error::NotPowerOfTwo(u.len()));
    }
    let mut x = u.to_vec();
    polar_transform_in_place(&mut x);
    Ok(x)
}

/// In-place butterfly; the caller guarantees a power-of-two length.
pub(crate) fn polar_transform_in_place(x: &mut [u8]) {
    let len = x.len();
    let mut half = 1;
    while half < len {
        for block in x.chunks_mut(2 * half) {
            let (upper, lower) = block.split_at_mut(half);
            for (a, b) in upper.iter_mut().zip(lower.iter()) {
                *a ^= *b;
            }
        }
        half *= 2;
    }
}

/// Modified find-first-set: index of the lowest set bit of `i`, or `n - 1`
/// for `i = 0`. This is the first (deepest) stage activated when decoding
/// bit `i`.
pub fn ffs_star(i: usize, n: usize) -> usize {
    if i == 0 {
        n.saturating_sub(1)
    } else {
        i.trailing_zeros() as usize
    }
}

/// Deepest stage overwritten while decoding bits `i_start..=i_curr`.
pub fn s_max(i_start: usize, i_curr: usize, n: usize) -> Result<usize> {
    if i_start > i_curr {
        return Err(Error::InvalidArgument(format!(
            "s_max: i_start {i_start} > i_curr {i_curr}"
        )));
    }
    Ok((i_start..=i_curr).map(|i| ffs_star(i, n)).max().unwrap_or(0))
}

/// Check-node rule used for f-type combinations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckRule {
    /// `sign(a) sign(b) min(|a|, |b|)`
    #[default]
    MinSum,
    /// `2 atanh(tanh(a/2) tanh(b/2))`, evaluated in a numerically stable form.
    Exact,
}

impl CheckRule {
    #[inline]
    pub fn f(self, a: f64, b: f64) -> f64 {
        let sign = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
        let (abs_a, abs_b) = (a.abs(), b.abs());
        match self {
            CheckRule::MinSum => sign * abs_a.min(abs_b),
            CheckRule::Exact => {
                let corr = (-(abs_a + abs_b)).exp().ln_1p() - (-(abs_a - abs_b).abs()).exp().ln_1p();
                sign * (abs_a.min(abs_b) + corr)
            }
        }
    }
}

/// Bit-node combination `b + (1 - 2u) a`.
#[inline]
pub fn g_node(a: f64, b: f64, u: u8) -> f64 {
    if u == 0 {
        b + a
    } else {
        b - a
    }
}

/// Complexity counters shared by every decoder.
///
/// A time step is the processing of one factor-graph stage. One operation is
/// one f/g node evaluation, one metric addition or one comparison.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub time_steps: u64,
    pub operations: u64,
}

impl Counters {
    pub fn add(&mut self, other: Counters) {
        self.time_steps += other.time_steps;
        self.operations += other.operations;
    }
}

/// In-place LLR and partial-sum storage for SC-family decoding.
#[derive(Clone, Debug)]
pub struct FactorGraphMemory {
    stages: usize,
    channel: Arc<[f64]>,
    llrs: Vec<Arc<Vec<f64>>>,
    psums: Vec<Arc<Vec<u8>>>,
    rule: CheckRule,
    pub counters: Counters,
}

impl FactorGraphMemory {
    pub fn new(channel_llrs: impl Into<Arc<[f64]>>, rule: CheckRule) -> Result<Self> {
        let channel: Arc<[f64]> = channel_llrs.into();
        let len = channel.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        let stages = len.trailing_zeros() as usize;
        Ok(Self {
            stages,
            channel,
            llrs: (0..stages).map(|s| Arc::new(vec![0.0; 1 << s])).collect(),
            psums: (0..stages).map(|s| Arc::new(vec![0; 1 << s])).collect(),
            rule,
            counters: Counters::default(),
        })
    }

    pub fn block_len(&self) -> usize {
        self.channel.len()
    }

    /// `n = log2 N`.
    pub fn stages(&self) -> usize {
        self.stages
    }

    pub fn rule(&self) -> CheckRule {
        self.rule
    }

    pub fn channel_llrs(&self) -> &[f64] {
        &self.channel
    }

    /// Intermediate LLRs of stage `s` (`s < n`); stage 0 is the decision LLR.
    pub fn stage_llrs(&self, s: usize) -> &[f64] {
        &self.llrs[s]
    }

    /// Partial sums feeding the g-nodes that produce stage `stage - 1`
    /// (`1 <= stage <= n`). Stage `s` holds `2^(s-1)` bits.
    pub fn partial_sums(&self, stage: usize) -> &[u8] {
        &self.psums[stage - 1]
    }

    /// Number of stored intermediate LLRs and partial sums, both `N - 1`.
    pub fn storage_len(&self) -> (usize, usize) {
        (
            self.llrs.iter().map(|s| s.len()).sum(),
            self.psums.iter().map(|s| s.len()).sum(),
        )
    }

    /// Copies the LLR and partial-sum state of `snapshot` while keeping this
    /// memory's counters.
    pub fn restore_from(&mut self, snapshot: &FactorGraphMemory) {
        let counters = self.counters;
        *self = snapshot.clone();
        self.counters = counters;
    }

    /// Deep copy of `other` into this memory's own buffers, leaving no
    /// storage shared. Reuses allocations when they are not shared already.
    pub fn copy_from(&mut self, other: &FactorGraphMemory) {
        fn copy<T: Copy>(dst: &mut Vec<Arc<Vec<T>>>, src: &[Arc<Vec<T>>]) {
            dst.resize_with(src.len(), || Arc::new(Vec::new()));
            for (d, s) in dst.iter_mut().zip(src) {
                match Arc::get_mut(d) {
                    Some(buf) if buf.len() == s.len() => buf.copy_from_slice(s),
                    _ => *d = Arc::new(s.to_vec()),
                }
            }
        }
        copy(&mut self.llrs, &other.llrs);
        copy(&mut self.psums, &other.psums);
        self.stages = other.stages;
        self.channel = other.channel.clone();
        self.rule = other.rule;
        self.counters = other.counters;
    }

    /// Computes the decision LLR of bit `i`, activating stages
    /// `ffs*(i)..=0`. The deepest activated stage uses a g-node for `i > 0`.
    pub fn update_llrs(&mut self, i: usize) -> f64 {
        let top = ffs_star(i, self.stages);
        for s in (0..=top).rev() {
            let use_g = s == top && i > 0;
            self.compute_stage(s, use_g);
        }
        self.counters.time_steps += top as u64 + 1;
        self.counters.operations += (1u64 << (top + 1)) - 1;
        self.llrs[0][0]
    }

    fn compute_stage(&mut self, s: usize, use_g: bool) {
        let half = 1usize << s;
        let (lower_stages, upper_stages) = self.llrs.split_at_mut(s + 1);
        let src: &[f64] = if s + 1 == self.stages {
            &self.channel
        } else {
            &upper_stages[0]
        };
        let dst = Arc::make_mut(&mut lower_stages[s]);
        let (top, bottom) = src.split_at(half);
        if use_g {
            let psums = &self.psums[s];
            for k in 0..half {
                dst[k] = g_node(top[k], bottom[k], psums[k]);
            }
        } else {
            let rule = self.rule;
            for k in 0..half {
                dst[k] = rule.f(top[k], bottom[k]);
            }
        }
    }

    /// Propagates the decision `u` of bit `i` into the partial sums. The
    /// update reaches `ffs*(i + 1)` stages; the final bit completes the
    /// codeword, which is not stored.
    pub fn update_partial_sums(&mut self, i: usize, u: u8) {
        let depth = (i as u64).trailing_ones() as usize;
        if depth >= self.stages {
            return;
        }
        let size = 1usize << depth;
        let (done, rest) = self.psums.split_at_mut(depth);
        let dst = Arc::make_mut(&mut rest[0]);
        dst[size - 1] = u;
        for (l, left) in done.iter().enumerate() {
            let block = 1usize << l;
            let off = size - 2 * block;
            for k in 0..block {
                dst[off + k] = left[k] ^ dst[off + block + k];
            }
        }
    }

    /// Partial rewind: brings the memory from bit `i_curr` back to the state
    /// a fresh in-order pass would have right before decoding `i_start`.
    ///
    /// The memory must be consistent with bits `0..i_curr` having been
    /// decoded (the decision LLR of `i_curr` may or may not have been
    /// computed); `u_hat` must hold the decisions for `0..i_start`. Only the
    /// stages overwritten since `i_start` are recomputed; every replayed
    /// stage and partial-sum update is charged as a time step.
    pub fn rewind(&mut self, i_start: usize, i_curr: usize, u_hat: &[u8]) -> Result<()> {
        if i_start > i_curr {
            return Err(Error::InvalidArgument(format!(
                "rewind: i_start {i_start} > i_curr {i_curr}"
            )));
        }
        let n = self.stages;
        // Odd indices share their stage-1 values with the preceding even bit.
        let curr = i_curr & !1;
        let start = i_start & !1;
        let s_start = ffs_star(start, n);
        let deepest = s_max(start, curr, n)?;
        let replay_from = if s_start < deepest {
            let back = self.find_s_max_pos(s_start, deepest, start);
            self.update_ps_back(back, deepest, u_hat);
            back
        } else {
            start
        };
        for i in replay_from..i_start {
            self.update_llrs(i);
            self.update_partial_sums(i, u_hat[i]);
        }
        Ok(())
    }

    /// Steps back over even indices from `start` until one whose activation
    /// reaches stage `deepest`; index 0 reaches every stage.
    fn find_s_max_pos(&self, s_start: usize, deepest: usize, start: usize) -> usize {
        let mut pos = start;
        let mut reach = s_start;
        while reach < deepest {
            pos -= 2;
            reach = if pos > 0 { ffs_star(pos, self.stages) } else { self.stages };
        }
        pos
    }

    /// Rebuilds the left-sibling partial sums consumed by the g-node at the
    /// replay start, when that sibling sits at the overwritten stage.
    fn update_ps_back(&mut self, back: usize, deepest: usize, u_hat: &[u8]) {
        if back == 0 || ffs_star(back, self.stages) != deepest {
            return;
        }
        let k = 1usize << deepest;
        for i in back - k..back {
            self.update_partial_sums(i, u_hat[i]);
            self.counters.time_steps += 1;
        }
    }
}
