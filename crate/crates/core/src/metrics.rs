//! Path-metric arithmetic shared by the list, stack and Fano decoders.

use serde::{Deserialize, Serialize};

/// Local ML decision; `λ = 0` resolves to 1.
#[inline]
pub fn hard_decision(llr: f64) -> u8 {
    if llr > 0.0 {
        0
    } else {
        1
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    /// `0` on agreement with the hard decision, `-|λ|` otherwise.
    #[default]
    Approx,
    /// `-ln(1 + e^{-(1-2u)λ})`.
    Exact,
}

/// LLR-based branch metric, always `<= 0`.
#[inline]
pub fn branch_metric(llr: f64, u: u8, kind: MetricKind) -> f64 {
    match kind {
        MetricKind::Approx => {
            if u == hard_decision(llr) {
                0.0
            } else {
                -llr.abs()
            }
        }
        MetricKind::Exact => {
            let x = if u == 0 { llr } else { -llr };
            // -ln(1 + e^{-x}), stable for either sign of x
            if x >= 0.0 {
                -(-x).exp().ln_1p()
            } else {
                x - x.exp().ln_1p()
            }
        }
    }
}

/// List-decoding path metric: penalise the less likely value by `|λ|`.
#[inline]
pub fn list_pm_update(pm_prev: f64, llr: f64, u: u8) -> f64 {
    if u == hard_decision(llr) {
        pm_prev
    } else {
        pm_prev + llr.abs()
    }
}

/// One step of the biased Fano metric. `bias_term` is `ln(1 - p_e,j)`.
#[inline]
pub fn fano_metric_step(mu_prev: f64, llr: f64, u: u8, bias_term: f64, alpha_q: f64, kind: MetricKind) -> f64 {
    mu_prev + branch_metric(llr, u, kind) - alpha_q * bias_term
}

/// Ratio of the observed partial metric to its expected value. `None` when
/// no adaptation applies (ratio not above 1 or zero expectation).
pub fn compute_alpha(actual_partial: f64, expected_partial: f64) -> Option<f64> {
    if expected_partial == 0.0 {
        return None;
    }
    let alpha = actual_partial / expected_partial;
    (alpha > 1.0).then_some(alpha)
}

/// Smallest multiple of `delta_q` not below `alpha`.
pub fn quantize_alpha(alpha: f64, delta_q: u32) -> f64 {
    let dq = f64::from(delta_q.max(1));
    (alpha / dq).ceil() * dq
}

/// Shifts a stored metric to account for scaling the bias by `alpha_q`;
/// `bias_tail` is `B^c` at the node the metric belongs to.
#[inline]
pub fn retro_update(mu: f64, bias_tail: f64, alpha_q: f64) -> f64 {
    mu + (alpha_q - 1.0) * bias_tail
}

/// Largest multiple of `delta` strictly below `mu`, as a step count.
pub fn threshold_steps_below(mu: f64, delta: f64) -> i64 {
    (mu / delta).ceil() as i64 - 1
}
