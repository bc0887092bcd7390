use std::cell::Cell;
use std::sync::Arc;

use super::{decision_llr, DecodeOutput, Decoder};
use crate::code::CodeSpec;
use crate::conv::{conv_output, conv_step, ConvState};
use crate::kernel::{ffs_star, CheckRule, Counters, FactorGraphMemory};
use crate::metrics::{hard_decision, list_pm_update};

/// Successive-cancellation decoding: frozen bits follow the pre-transform,
/// information bits take the hard decision on `u`.
pub fn sc_decode(code: &CodeSpec, llrs: &[f64], rule: CheckRule) -> DecodeOutput {
    let n = code.block_len();
    let profile = code.profile();
    let g = code.g();
    let mut mem = FactorGraphMemory::new(llrs.to_vec(), rule).expect("channel length is a power of two");
    let mut state = g.initial_state();
    let mut counters = Counters::default();
    let mut v_hat = vec![0u8; n];
    for i in 0..n {
        let llr = decision_llr(&mut mem, i, &mut counters);
        let u = if profile.is_info(i) {
            let v = hard_decision(llr) ^ conv_output(0, &state, g);
            v_hat[i] = v;
            conv_step(v, &mut state, g)
        } else {
            conv_step(0, &mut state, g)
        };
        mem.update_partial_sums(i, u);
    }
    DecodeOutput { v_hat, counters, converged: true }
}

pub struct ScDecoder {
    code: Arc<CodeSpec>,
    rule: CheckRule,
}

impl ScDecoder {
    pub fn new(code: Arc<CodeSpec>, rule: CheckRule) -> Self {
        Self { code, rule }
    }
}

impl Decoder for ScDecoder {
    fn decode(&self, llrs: &[f64]) -> DecodeOutput {
        sc_decode(&self.code, llrs, self.rule)
    }
}

/// One surviving path at the end of list decoding.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub v: Vec<u8>,
    pub pm: f64,
}

#[derive(Clone)]
struct Path {
    mem: FactorGraphMemory,
    state: ConvState,
    v: Vec<u8>,
    pm: f64,
}

impl Path {
    fn copy_from(&mut self, other: &Path) {
        self.mem.copy_from(&other.mem);
        self.state.clone_from(&other.state);
        self.v.copy_from_slice(&other.v);
        self.pm = other.pm;
    }
}

fn pair_mut<T>(xs: &mut [T], a: usize, b: usize) -> (&mut T, &T) {
    assert_ne!(a, b);
    if a < b {
        let (lo, hi) = xs.split_at_mut(b);
        (&mut lo[a], &hi[0])
    } else {
        let (lo, hi) = xs.split_at_mut(a);
        (&mut hi[0], &lo[b])
    }
}

#[derive(Clone, Copy)]
struct Child {
    pm: f64,
    parent: usize,
    bad: bool,
    v: u8,
}

/// SC-list decoding with metric-sorted pruning.
///
/// Survivors are ranked by `(pm, parent index, good child first)`, so a list
/// of one reproduces SC exactly, including `λ = 0` ties.
pub struct ListDecoder {
    code: Arc<CodeSpec>,
    list_size: usize,
    rule: CheckRule,
    crc_aided: bool,
}

impl ListDecoder {
    pub fn new(code: Arc<CodeSpec>, list_size: usize, rule: CheckRule) -> Self {
        Self { code, list_size: list_size.max(1), rule, crc_aided: true }
    }

    pub fn crc_aided(mut self, on: bool) -> Self {
        self.crc_aided = on;
        self
    }

    pub fn list_size(&self) -> usize {
        self.list_size
    }

    /// Runs list decoding and returns every surviving path ordered by
    /// metric. `forced[i] = Some(b)` pins `v_i = b` at information position
    /// `i`.
    pub fn decode_list(&self, llrs: &[f64], forced: Option<&[Option<u8>]>) -> (Vec<Candidate>, Counters) {
        let code = &*self.code;
        let n = code.block_len();
        let profile = code.profile();
        let g = code.g();
        let mut counters = Counters::default();
        let mut paths = vec![Path {
            mem: FactorGraphMemory::new(llrs.to_vec(), self.rule).expect("channel length is a power of two"),
            state: g.initial_state(),
            v: vec![0u8; n],
            pm: 0.0,
        }];
        let mut children: Vec<Child> = Vec::with_capacity(2 * self.list_size);
        let mut llr_of = Vec::with_capacity(self.list_size);
        let mut kids: Vec<u8> = Vec::new();
        let mut free: Vec<usize> = Vec::new();
        let mut used: Vec<bool> = Vec::new();
        let mut slots: Vec<usize> = Vec::with_capacity(self.list_size);

        for i in 0..n {
            llr_of.clear();
            let mut stage_work = Counters::default();
            for p in paths.iter_mut() {
                llr_of.push(decision_llr(&mut p.mem, i, &mut stage_work));
            }
            // Paths run in lockstep: time steps are counted once per bit.
            counters.operations += stage_work.operations;
            counters.time_steps += ffs_star(i, profile_stages(n)) as u64 + 1;

            let pinned = forced.and_then(|f| f[i]);
            if !profile.is_info(i) || pinned.is_some() {
                let v = pinned.unwrap_or(0);
                for (p, &llr) in paths.iter_mut().zip(&llr_of) {
                    let u = conv_step(v, &mut p.state, g);
                    p.pm = list_pm_update(p.pm, llr, u);
                    p.v[i] = v;
                    p.mem.update_partial_sums(i, u);
                }
                counters.operations += paths.len() as u64;
                continue;
            }

            children.clear();
            for (parent, (p, &llr)) in paths.iter().zip(&llr_of).enumerate() {
                let u0 = conv_output(0, &p.state, g);
                let hd = hard_decision(llr);
                for v in 0..2u8 {
                    let u = u0 ^ v;
                    children.push(Child { pm: list_pm_update(p.pm, llr, u), parent, bad: u != hd, v });
                }
            }
            counters.operations += children.len() as u64;

            let comparisons = Cell::new(0u64);
            let by_key = |a: &Child, b: &Child| {
                comparisons.set(comparisons.get() + 1);
                a.pm.total_cmp(&b.pm).then(a.parent.cmp(&b.parent)).then(a.bad.cmp(&b.bad))
            };
            // Only membership matters: survivors keep their parents' slots.
            if children.len() > self.list_size {
                children.select_nth_unstable_by(self.list_size - 1, by_key);
                children.truncate(self.list_size);
            }
            counters.operations += comparisons.get();

            // Survivors reuse the slots of pruned paths; a parent keeping both
            // children is first copied into a free slot.
            kids.clear();
            kids.resize(paths.len(), 0);
            for c in &children {
                kids[c.parent] += 1;
            }
            free.clear();
            free.extend((0..paths.len()).filter(|&p| kids[p] == 0));
            used.clear();
            used.resize(paths.len(), false);
            slots.clear();
            for c in &children {
                if !used[c.parent] {
                    used[c.parent] = true;
                    slots.push(c.parent);
                } else if let Some(slot) = free.pop() {
                    let (dst, src) = pair_mut(&mut paths, slot, c.parent);
                    dst.copy_from(src);
                    slots.push(slot);
                } else {
                    paths.push(paths[c.parent].clone());
                    slots.push(paths.len() - 1);
                }
            }
            for (c, &slot) in children.iter().zip(&slots) {
                let p = &mut paths[slot];
                let u = conv_step(c.v, &mut p.state, g);
                p.v[i] = c.v;
                p.pm = c.pm;
                p.mem.update_partial_sums(i, u);
            }
            for &slot in free.iter().rev() {
                paths.swap_remove(slot);
            }
        }

        let mut out: Vec<Candidate> = paths.into_iter().map(|p| Candidate { v: p.v, pm: p.pm }).collect();
        out.sort_by(|a, b| a.pm.total_cmp(&b.pm));
        (out, counters)
    }
}

fn profile_stages(n: usize) -> usize {
    n.trailing_zeros() as usize
}

impl Decoder for ListDecoder {
    fn decode(&self, llrs: &[f64]) -> DecodeOutput {
        let (list, counters) = self.decode_list(llrs, None);
        let chosen = if self.crc_aided && self.code.crc().is_some() {
            list.iter().find(|c| self.code.crc_ok(&c.v)).unwrap_or(&list[0])
        } else {
            &list[0]
        };
        DecodeOutput { v_hat: chosen.v.clone(), counters, converged: true }
    }
}

/// True when the decoder returned a wrong `v` whose codeword is nevertheless
/// closer to `y` (squared Euclidean distance over BPSK symbols) than the
/// transmitted one, i.e. a maximum-likelihood decoder would fail as well.
pub fn ml_bound_event(v_hat: &[u8], x_hat: &[u8], v_true: &[u8], x_true: &[u8], y: &[f64]) -> bool {
    if v_hat == v_true {
        return false;
    }
    let dist = |x: &[u8]| -> f64 {
        x.iter()
            .zip(y)
            .map(|(&b, &r)| {
                let s = if b == 0 { 1.0 } else { -1.0 };
                (s - r) * (s - r)
            })
            .sum()
    };
    dist(x_hat) < dist(x_true)
}
