use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{DecodeOutput, Decoder};
use crate::code::CodeSpec;
use crate::conv::{conv_output, conv_step, ConvState};
use crate::kernel::{CheckRule, Counters, FactorGraphMemory};
use crate::metrics::{
    compute_alpha, fano_metric_step, hard_decision, quantize_alpha, retro_update, threshold_steps_below, MetricKind,
};

/// Fano decoder settings. Every search technique has its own switch so the
/// techniques can be evaluated separately.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FanoConfig {
    /// Threshold step `Δ`.
    pub delta: f64,
    /// Quantisation step of the bias scale.
    pub delta_q: u32,
    /// Bit index from which the bias scale is evaluated; `None` picks
    /// `round(0.6 K)`.
    pub i_bu: Option<usize>,
    /// Maximum number of bad-branch decisions on a path; `None` disables the
    /// constraint.
    pub max_diversions: Option<usize>,
    /// Only diverge at critical-set positions.
    pub use_critical_set: bool,
    /// Choose branch-off points from the root downwards.
    pub use_top_down: bool,
    /// Scale the bias by the observed noise level.
    pub use_adaptive_bias: bool,
    /// Lower the threshold straight below the current metric instead of one
    /// `Δ` per backtracking cycle.
    pub use_one_shot_threshold: bool,
    /// Replace the stored metric of an explored bad branch with the best
    /// metric seen below it.
    pub use_refresh: bool,
    pub metric: MetricKind,
    /// Abort after this many multiples of the SC baseline `2N - 2` time
    /// steps; `None` disables the guard.
    pub time_step_budget: Option<u64>,
    /// Abort instead of lowering the threshold for a path metric below
    /// `factor · α_q · B`; `None` disables the guard.
    pub metric_abort_factor: Option<f64>,
}

impl Default for FanoConfig {
    fn default() -> Self {
        Self::constrained()
    }
}

impl FanoConfig {
    /// All complexity-reduction techniques enabled.
    pub fn constrained() -> Self {
        Self {
            delta: 1.0,
            delta_q: 2,
            i_bu: None,
            max_diversions: Some(4),
            use_critical_set: true,
            use_top_down: true,
            use_adaptive_bias: true,
            use_one_shot_threshold: true,
            use_refresh: true,
            metric: MetricKind::Approx,
            time_step_budget: Some(200),
            metric_abort_factor: Some(5.0),
        }
    }

    /// Plain Fano search: every complexity-reduction technique off, the
    /// threshold lowered one `Δ` per cycle. The abort guards keep their
    /// defaults.
    pub fn unconstrained() -> Self {
        Self {
            max_diversions: None,
            use_critical_set: false,
            use_top_down: false,
            use_adaptive_bias: false,
            use_one_shot_threshold: false,
            use_refresh: false,
            ..Self::constrained()
        }
    }

    /// Same settings without either abort guard.
    pub fn unguarded(self) -> Self {
        Self { time_step_budget: None, metric_abort_factor: None, ..self }
    }
}

/// Everything the Fano search reports about one frame.
#[derive(Clone, Debug, PartialEq)]
pub struct FanoOutput {
    pub v_hat: Vec<u8>,
    pub u_hat: Vec<u8>,
    /// Per information bit: 1 where the accepted path took the bad branch.
    pub diversions: Vec<u8>,
    pub final_metric: f64,
    /// Final threshold, an integer multiple of `Δ`.
    pub threshold: f64,
    pub alpha_q: f64,
    pub counters: Counters,
    /// Rewinds and snapshot restores.
    pub backward_moves: u64,
    pub converged: bool,
}

pub struct FanoDecoder {
    code: Arc<CodeSpec>,
    cfg: FanoConfig,
    rule: CheckRule,
}

impl FanoDecoder {
    pub fn new(code: Arc<CodeSpec>, cfg: FanoConfig, rule: CheckRule) -> Self {
        Self { code, cfg, rule }
    }

    pub fn config(&self) -> &FanoConfig {
        &self.cfg
    }

    pub fn decode_full(&self, llrs: &[f64]) -> FanoOutput {
        Search::new(&self.code, &self.cfg, self.rule, llrs).run()
    }
}

impl Decoder for FanoDecoder {
    fn decode(&self, llrs: &[f64]) -> DecodeOutput {
        let out = self.decode_full(llrs);
        DecodeOutput { v_hat: out.v_hat, counters: out.counters, converged: out.converged }
    }
}

enum Flow {
    Continue,
    Recheck,
    Abort,
}

struct Search<'a> {
    code: &'a CodeSpec,
    cfg: &'a FanoConfig,
    info: &'a [usize],
    critical: Vec<bool>,
    max_div: usize,
    i_bu: usize,
    max_steps: u64,
    mem: FactorGraphMemory,
    state: ConvState,
    /// Register contents before each information bit.
    state_at: Vec<ConvState>,
    /// `mu[i + 1] = μ_i`, `mu[0] = B`.
    mu: Vec<f64>,
    /// Metric of the branch not taken, per information bit.
    mu_alt: Vec<f64>,
    /// Best metric reached below an explored branch-off point.
    mu_explored: Vec<f64>,
    delta: Vec<u8>,
    stem_flag: Vec<bool>,
    u_hat: Vec<u8>,
    v_hat: Vec<u8>,
    t: i64,
    alpha_q: f64,
    bias_evaluated: bool,
    on_main: bool,
    backtracking: bool,
    to_diverge: bool,
    j_end: usize,
    stem: Option<usize>,
    snapshot: Option<FactorGraphMemory>,
    /// Lowest information index eligible as a new stem during a top-down
    /// re-walk.
    rewalk_from: usize,
    i: usize,
    j: usize,
    backward_moves: u64,
}

impl<'a> Search<'a> {
    fn new(code: &'a CodeSpec, cfg: &'a FanoConfig, rule: CheckRule, llrs: &[f64]) -> Self {
        let n = code.block_len();
        let profile = code.profile();
        let k = profile.info_len();
        let mut mu = vec![0.0; n + 1];
        mu[0] = profile.bias_total();
        Self {
            code,
            cfg,
            info: profile.info_set(),
            critical: if cfg.use_critical_set { profile.critical().to_vec() } else { vec![true; k] },
            max_div: cfg.max_diversions.unwrap_or(usize::MAX),
            i_bu: cfg.i_bu.unwrap_or_else(|| (0.6 * k as f64).round() as usize),
            max_steps: cfg.time_step_budget.map_or(u64::MAX, |b| b.saturating_mul(2 * n as u64 - 2)),
            mem: FactorGraphMemory::new(llrs.to_vec(), rule).expect("channel length is a power of two"),
            state: code.g().initial_state(),
            state_at: vec![ConvState::default(); k],
            mu,
            mu_alt: vec![f64::NEG_INFINITY; k],
            mu_explored: vec![f64::NEG_INFINITY; k],
            delta: vec![0; k],
            stem_flag: vec![false; k],
            u_hat: vec![0; n],
            v_hat: vec![0; n],
            t: 0,
            alpha_q: 1.0,
            bias_evaluated: !cfg.use_adaptive_bias,
            on_main: true,
            backtracking: false,
            to_diverge: false,
            j_end: usize::MAX,
            stem: None,
            snapshot: None,
            rewalk_from: 0,
            i: 0,
            j: 0,
            backward_moves: 0,
        }
    }

    fn threshold(&self) -> f64 {
        self.t as f64 * self.cfg.delta
    }

    fn ops(&mut self, n: u64) {
        self.mem.counters.operations += n;
    }

    fn finish(mut self, converged: bool) -> FanoOutput {
        let n = self.code.block_len();
        // Entries past the current bit belong to abandoned explorations.
        let j = self.j;
        self.delta[j..].fill(0);
        FanoOutput {
            final_metric: self.mu[self.i.min(n)],
            threshold: self.threshold(),
            alpha_q: self.alpha_q,
            counters: self.mem.counters,
            backward_moves: self.backward_moves,
            diversions: self.delta,
            v_hat: self.v_hat,
            u_hat: self.u_hat,
            converged,
        }
    }

    fn run(mut self) -> FanoOutput {
        let n = self.code.block_len();
        let profile = self.code.profile();
        let g = self.code.g();
        let kind = self.cfg.metric;
        let mut cached: Option<f64> = None;

        loop {
            if self.mem.counters.time_steps > self.max_steps {
                return self.finish(false);
            }
            if self.i == n {
                return self.finish(true);
            }
            let i = self.i;
            let llr = match cached.take() {
                Some(l) => l,
                None => self.mem.update_llrs(i),
            };

            if !profile.is_info(i) {
                let u = conv_step(0, &mut self.state, g);
                self.mu[i + 1] = fano_metric_step(self.mu[i], llr, u, profile.bias_term(i), self.alpha_q, kind);
                self.ops(2);
                self.mem.update_partial_sums(i, u);
                self.u_hat[i] = u;
                self.v_hat[i] = 0;
                self.i += 1;
                continue;
            }

            let j = self.j;
            let u0 = conv_output(0, &self.state, g);
            let bias = profile.bias_term(i);
            let m0 = fano_metric_step(self.mu[i], llr, u0, bias, self.alpha_q, kind);
            let m1 = fano_metric_step(self.mu[i], llr, u0 ^ 1, bias, self.alpha_q, kind);
            self.ops(5);
            let v_good = if m0 > m1 {
                0
            } else if m1 > m0 {
                1
            } else {
                hard_decision(llr) ^ u0
            };
            let (mu_good, mu_bad) = if v_good == 0 { (m0, m1) } else { (m1, m0) };

            if self.on_main && self.backtracking {
                if j == self.j_end {
                    self.backtracking = false;
                    if let Flow::Abort = self.lower_threshold(mu_good) {
                        return self.finish(false);
                    }
                } else if self.cfg.use_top_down
                    && !self.to_diverge
                    && !self.stem_flag[j]
                    && j >= self.rewalk_from
                    && self.eligible(j, mu_bad)
                {
                    // New branch-off point on the way down the main path.
                    self.snapshot = Some(self.mem.clone());
                    self.open_stem(j);
                    self.to_diverge = true;
                }
            }

            let rewalking = self.on_main && self.backtracking && j < self.j_end;
            if self.to_diverge {
                self.to_diverge = false;
                self.mu_alt[j] = mu_good;
                self.delta[j] = 1;
                self.mu[i + 1] = mu_bad;
                self.advance(v_good ^ 1);
                continue;
            }
            if mu_good > self.threshold() || rewalking {
                self.mu_alt[j] = if self.on_main && self.stem_flag[j] {
                    self.stem_flag[j] = false;
                    if self.cfg.use_refresh {
                        self.mu_explored[j]
                    } else {
                        mu_bad
                    }
                } else {
                    mu_bad
                };
                self.ops(1);
                self.delta[j] = 0;
                self.mu[i + 1] = mu_good;
                self.advance(v_good);
                continue;
            }

            self.ops(1);
            let flow = if self.on_main {
                self.violation_on_main(mu_good)
            } else {
                self.violation_off_main(mu_good)
            };
            match flow {
                Flow::Continue => {}
                Flow::Recheck => cached = Some(llr),
                Flow::Abort => return self.finish(false),
            }
        }
    }

    /// Takes branch `v` at the current information bit.
    fn advance(&mut self, v: u8) {
        let (i, j) = (self.i, self.j);
        self.state_at[j].clone_from(&self.state);
        let u = conv_step(v, &mut self.state, self.code.g());
        self.u_hat[i] = u;
        self.v_hat[i] = v;
        self.mem.update_partial_sums(i, u);
        self.i += 1;
        self.j += 1;
    }

    /// Bad branch at information bit `k` may be explored.
    fn eligible(&mut self, k: usize, alt: f64) -> bool {
        self.ops(1);
        alt > self.threshold() && self.critical[k] && self.delta[..k].iter().map(|&d| d as usize).sum::<usize>() < self.max_div
    }

    fn lower_threshold(&mut self, mu: f64) -> Flow {
        if let Some(f) = self.cfg.metric_abort_factor {
            if mu < f * self.alpha_q * self.code.profile().bias_total() {
                return Flow::Abort;
            }
        }
        self.t = if self.cfg.use_one_shot_threshold {
            threshold_steps_below(mu, self.cfg.delta).min(self.t - 1)
        } else {
            self.t - 1
        };
        Flow::Recheck
    }

    /// Moves the engine back to information bit `k` of the current path.
    fn rewind_to(&mut self, k: usize) {
        let target = self.info[k];
        self.mem.rewind(target, self.i, &self.u_hat).expect("rewinding backwards");
        self.state.clone_from(&self.state_at[k]);
        self.i = target;
        self.j = k;
        self.backward_moves += 1;
    }

    fn open_stem(&mut self, k: usize) {
        self.stem = Some(k);
        self.stem_flag[k] = true;
        self.mu_explored[k] = f64::NEG_INFINITY;
        self.on_main = false;
    }

    /// Leaves the main path at information bit `k` (behind the current one).
    fn branch_off(&mut self, k: usize) {
        self.rewind_to(k);
        self.snapshot = Some(self.mem.clone());
        self.open_stem(k);
        self.to_diverge = true;
    }

    fn violation_on_main(&mut self, mu_good: f64) -> Flow {
        let i = self.i;
        let j = self.j;
        if !self.bias_evaluated {
            if i < self.i_bu {
                // No backtracking before the bias has been calibrated.
                return self.lower_threshold(mu_good);
            }
            self.bias_evaluated = true;
            let profile = self.code.profile();
            let b = profile.bias_total();
            if mu_good < b {
                let tail = profile.bias_tail(i as isize);
                if let Some(alpha) = compute_alpha(mu_good - tail, b - tail) {
                    self.alpha_q = quantize_alpha(alpha, self.cfg.delta_q);
                    let aq = self.alpha_q;
                    for (ii, m) in self.mu.iter_mut().enumerate().take(i + 1) {
                        *m = retro_update(*m, profile.bias_tail(ii as isize - 1), aq);
                    }
                    for k in 0..j {
                        let tail_k = profile.bias_tail(self.info[k] as isize);
                        self.mu_alt[k] = retro_update(self.mu_alt[k], tail_k, aq);
                        if self.mu_explored[k].is_finite() {
                            self.mu_explored[k] = retro_update(self.mu_explored[k], tail_k, aq);
                        }
                    }
                    self.ops(2 * (i + j) as u64 + 4);
                    return Flow::Recheck;
                }
            }
        }

        self.j_end = j;
        self.backtracking = true;
        self.rewalk_from = 0;
        let pick = if self.cfg.use_top_down {
            (0..j).find(|&k| self.eligible(k, self.mu_alt[k]))
        } else {
            (0..j).rev().find(|&k| self.eligible(k, self.mu_alt[k]))
        };
        match pick {
            Some(k) => {
                self.branch_off(k);
                Flow::Continue
            }
            None => {
                self.backtracking = false;
                self.lower_threshold(mu_good)
            }
        }
    }

    fn violation_off_main(&mut self, mu_good: f64) -> Flow {
        let s = self.stem.expect("off the main path only below a stem");
        if mu_good > self.mu_explored[s] {
            self.mu_explored[s] = mu_good;
        }
        let j = self.j;
        let mut prefix: Vec<usize> = Vec::with_capacity(j + 1);
        let mut acc = 0usize;
        prefix.push(0);
        for &d in &self.delta[..j] {
            acc += d as usize;
            prefix.push(acc);
        }
        let t = self.threshold();
        let mut found = None;
        for k in (s + 1..j).rev() {
            self.ops(1);
            if self.delta[k] == 1 {
                continue;
            }
            if self.mu_alt[k] > t && self.critical[k] && prefix[k] < self.max_div {
                found = Some(k);
                break;
            }
        }
        if let Some(k) = found {
            self.rewind_to(k);
            self.to_diverge = true;
            return Flow::Continue;
        }

        // Subtree below the stem exhausted at this threshold.
        let snapshot = self.snapshot.take().expect("snapshot taken at the stem");
        self.mem.restore_from(&snapshot);
        self.backward_moves += 1;
        self.i = self.info[s];
        self.j = s;
        self.state.clone_from(&self.state_at[s]);
        self.delta[s] = 0;
        self.on_main = true;
        self.stem = None;
        if self.cfg.use_top_down {
            self.rewalk_from = s + 1;
            return Flow::Continue;
        }
        let next = (0..s).rev().find(|&k| self.eligible(k, self.mu_alt[k]));
        if let Some(k) = next {
            self.branch_off(k);
        }
        Flow::Continue
    }
}
