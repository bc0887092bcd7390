use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{decision_llr, DecodeOutput, Decoder};
use crate::code::CodeSpec;
use crate::conv::{conv_output, conv_step, ConvState};
use crate::kernel::{CheckRule, Counters, FactorGraphMemory};
use crate::metrics::{fano_metric_step, hard_decision, MetricKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StackConfig {
    /// Maximum number of stored partial paths `D`.
    pub depth: usize,
    #[serde(default)]
    pub metric: MetricKind,
    /// Give up after this many pops; `None` picks `256 N`.
    #[serde(default)]
    pub max_iterations: Option<u64>,
}

impl Default for StackConfig {
    fn default() -> Self {
        Self { depth: 256, metric: MetricKind::Approx, max_iterations: None }
    }
}

#[derive(Clone)]
struct Entry {
    mem: FactorGraphMemory,
    state: ConvState,
    v: Vec<u8>,
    mu: f64,
    /// Next bit to decode.
    len: usize,
}

/// Best-first decoding over the information-bit tree with the biased Fano
/// metric (`α = 1`). Frozen runs are absorbed into the parent extension.
pub struct StackDecoder {
    code: Arc<CodeSpec>,
    cfg: StackConfig,
    rule: CheckRule,
}

/// Outcome with the number of pops performed.
#[derive(Clone, Debug, PartialEq)]
pub struct StackOutput {
    pub decoded: DecodeOutput,
    pub iterations: u64,
}

impl StackDecoder {
    pub fn new(code: Arc<CodeSpec>, mut cfg: StackConfig, rule: CheckRule) -> Self {
        cfg.depth = cfg.depth.max(2);
        Self { code, cfg, rule }
    }

    pub fn decode_full(&self, llrs: &[f64]) -> StackOutput {
        let code = &*self.code;
        let n = code.block_len();
        let profile = code.profile();
        let g = code.g();
        let kind = self.cfg.metric;
        let max_iter = self.cfg.max_iterations.unwrap_or(256 * n as u64);
        let mut counters = Counters::default();

        // Ascending by (μ, length): best entry last, worst first.
        let mut stack: Vec<Entry> = vec![Entry {
            mem: FactorGraphMemory::new(llrs.to_vec(), self.rule).expect("channel length is a power of two"),
            state: g.initial_state(),
            v: vec![0u8; n],
            mu: profile.bias_total(),
            len: 0,
        }];
        let mut iterations = 0u64;
        let mut deepest: Option<Entry> = None;

        while let Some(mut e) = stack.pop() {
            iterations += 1;
            while e.len < n && !profile.is_info(e.len) {
                let i = e.len;
                let llr = decision_llr(&mut e.mem, i, &mut counters);
                let u = conv_step(0, &mut e.state, g);
                e.mu = fano_metric_step(e.mu, llr, u, profile.bias_term(i), 1.0, kind);
                e.mem.update_partial_sums(i, u);
                e.len += 1;
                counters.operations += 2;
            }
            if e.len == n {
                return StackOutput {
                    decoded: DecodeOutput { v_hat: e.v, counters, converged: true },
                    iterations,
                };
            }
            if iterations >= max_iter {
                let best = match deepest {
                    Some(d) if d.len > e.len => d,
                    _ => e,
                };
                return StackOutput {
                    decoded: DecodeOutput { v_hat: best.v, counters, converged: false },
                    iterations,
                };
            }

            let i = e.len;
            let llr = decision_llr(&mut e.mem, i, &mut counters);
            let u0 = conv_output(0, &e.state, g);
            let hd = hard_decision(llr);
            let mut kids = [e.clone(), e];
            for (v, kid) in kids.iter_mut().enumerate() {
                let v = v as u8;
                let u = conv_step(v, &mut kid.state, g);
                kid.mu = fano_metric_step(kid.mu, llr, u, profile.bias_term(i), 1.0, kind);
                kid.v[i] = v;
                kid.mem.update_partial_sums(i, u);
                kid.len = i + 1;
                counters.operations += 2;
            }
            // Good child pushed last so it wins ties.
            let [a, b] = kids;
            let (good, bad) = if u0 == hd { (a, b) } else { (b, a) };
            for kid in [bad, good] {
                if deepest.as_ref().is_none_or(|d| kid.len > d.len) {
                    deepest = Some(kid.clone());
                }
                let key = (kid.mu, kid.len);
                let pos = stack.partition_point(|x| {
                    counters.operations += 1;
                    (x.mu, x.len) <= key
                });
                stack.insert(pos, kid);
                if stack.len() > self.cfg.depth {
                    stack.remove(0);
                }
            }
        }
        unreachable!("stack never empties: every pop pushes two children")
    }
}

impl Decoder for StackDecoder {
    fn decode(&self, llrs: &[f64]) -> DecodeOutput {
        self.decode_full(llrs).decoded
    }
}
