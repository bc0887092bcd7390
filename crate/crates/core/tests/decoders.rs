mod common;

use std::sync::Arc;

use pactree::analysis::genie_corrections;
use pactree::decoder::{sc_decode, Decoder};
use pactree::metrics::{branch_metric, fano_metric_step, retro_update};
use pactree::sim::make_frame;
use pactree::{
    CheckRule, CodeConfig, CodeSpec, CrcSpec, DecoderConfig, FanoConfig, FanoDecoder, ListDecoder, MetricKind,
    StackConfig, StackDecoder,
};

fn pac(n: usize, k: usize) -> Arc<CodeSpec> {
    Arc::new(CodeConfig::pac_rm(n, k).build().unwrap())
}

#[test]
fn single_path_list_is_sc() {
    let code = pac(128, 64);
    let list = ListDecoder::new(code.clone(), 1, CheckRule::MinSum);
    for f in 0..2000 {
        let frame = make_frame(&code, 1.5, 31, f);
        let sc = sc_decode(&code, &frame.llrs, CheckRule::MinSum);
        assert_eq!(list.decode(&frame.llrs).v_hat, sc.v_hat, "frame {f}");
    }
}

#[test]
fn every_decoder_recovers_noiseless_frames() {
    let mut with_crc = CodeConfig::pac_rm(64, 24);
    with_crc.crc = Some(CrcSpec::a6());
    let codes = [
        pac(64, 32),
        Arc::new(CodeConfig::polar_rm(64, 32).build().unwrap()),
        Arc::new(with_crc.build().unwrap()),
        pac(16, 8),
    ];
    let configs = [
        DecoderConfig::Sc,
        DecoderConfig::Scl { list_size: 8, crc_aided: true },
        DecoderConfig::Stack(StackConfig::default()),
        DecoderConfig::Fano(FanoConfig::constrained()),
        DecoderConfig::Fano(FanoConfig::unconstrained()),
    ];
    let mut rng = common::rng(32);
    for code in &codes {
        let n = code.block_len();
        for cfg in &configs {
            let dec = cfg.build(code.clone(), CheckRule::MinSum);
            for _ in 0..100 {
                let data = common::random_bits(&mut rng, code.data_len());
                let cw = code.encode(&data).unwrap();
                let out = dec.decode(&common::noiseless_llrs(&cw.x));
                assert!(out.converged);
                assert_eq!(out.v_hat, cw.v, "{} N={n}", cfg.label());
                if matches!(cfg, DecoderConfig::Sc) {
                    assert_eq!(out.counters.time_steps, 2 * n as u64 - 2);
                }
            }
        }
    }
}

#[test]
fn noiseless_fano_walks_straight_through() {
    let code = pac(128, 64);
    let mut rng = common::rng(33);
    for cfg in [FanoConfig::constrained(), FanoConfig::unconstrained()] {
        let fano = FanoDecoder::new(code.clone(), cfg, CheckRule::MinSum);
        for _ in 0..50 {
            let cw = code.encode(&common::random_bits(&mut rng, 64)).unwrap();
            let out = fano.decode_full(&common::noiseless_llrs(&cw.x));
            assert_eq!(out.v_hat, cw.v);
            assert_eq!(out.backward_moves, 0);
            assert_eq!(out.final_metric, 0.0);
            assert_eq!(out.alpha_q, 1.0);
            assert_eq!(out.counters.time_steps, 254);
            assert!(out.diversions.iter().all(|&d| d == 0));
        }
    }
}

#[test]
fn noiseless_list_and_stack_metrics() {
    let code = pac(64, 32);
    let cw = code.encode(&[1; 32]).unwrap();
    let llrs = common::noiseless_llrs(&cw.x);
    let (list, _) = ListDecoder::new(code.clone(), 4, CheckRule::MinSum).decode_list(&llrs, None);
    assert_eq!(list[0].v, cw.v);
    assert_eq!(list[0].pm, 0.0);
    let stack = StackDecoder::new(code.clone(), StackConfig::default(), CheckRule::MinSum).decode_full(&llrs);
    assert_eq!(stack.decoded.v_hat, cw.v);
    assert_eq!(stack.iterations, code.info_len() as u64 + 1);
}

#[test]
fn fano_metric_is_an_unrolled_sum() {
    let code = pac(128, 64);
    let profile = code.profile();
    for f in 0..20 {
        let frame = make_frame(&code, 2.0, 34, f);
        let u = pactree::conv_trans(&frame.v, code.g());
        let mut mem = pactree::FactorGraphMemory::new(frame.llrs.clone(), CheckRule::MinSum).unwrap();
        let (mut mu, mut branch_sum, mut bias_sum) = (profile.bias_total(), 0.0, 0.0);
        for i in 0..128 {
            let llr = mem.update_llrs(i);
            mu = fano_metric_step(mu, llr, u[i], profile.bias_term(i), 1.0, MetricKind::Approx);
            branch_sum += branch_metric(llr, u[i], MetricKind::Approx);
            bias_sum += profile.bias_term(i);
            let oracle = profile.bias_total() + branch_sum - bias_sum;
            assert!((mu - oracle).abs() < 1e-9, "frame {f} bit {i}");
            mem.update_partial_sums(i, u[i]);
        }
    }
}

#[test]
fn retro_update_equals_recomputation() {
    let code = pac(128, 64);
    let profile = code.profile();
    let frame = make_frame(&code, 2.0, 35, 0);
    let u = pactree::conv_trans(&frame.v, code.g());
    let mut mem = pactree::FactorGraphMemory::new(frame.llrs.clone(), CheckRule::MinSum).unwrap();
    let llrs: Vec<f64> = (0..128)
        .map(|i| {
            let l = mem.update_llrs(i);
            mem.update_partial_sums(i, u[i]);
            l
        })
        .collect();
    for alpha in [2.0, 4.0, 6.0] {
        // Scaling the bias by alpha also scales the root metric B.
        let (mut plain, mut scaled) = (profile.bias_total(), alpha * profile.bias_total());
        for i in 0..128 {
            plain = fano_metric_step(plain, llrs[i], u[i], profile.bias_term(i), 1.0, MetricKind::Approx);
            scaled = fano_metric_step(scaled, llrs[i], u[i], profile.bias_term(i), alpha, MetricKind::Approx);
            let shifted = retro_update(plain, profile.bias_tail(i as isize), alpha);
            assert!((shifted - scaled).abs() < 1e-9, "alpha {alpha} bit {i}");
        }
    }
}

#[test]
fn constrained_fano_respects_its_limits() {
    let code = pac(128, 64);
    for delta in [1.0, 0.5, 2.0] {
        let cfg = FanoConfig { delta, ..FanoConfig::constrained() };
        let budget = cfg.max_diversions.unwrap();
        let fano = FanoDecoder::new(code.clone(), cfg, CheckRule::MinSum);
        for f in 0..1000 {
            let frame = make_frame(&code, 2.0, 36, f);
            let out = fano.decode_full(&frame.llrs);
            let used: usize = out.diversions.iter().map(|&d| usize::from(d)).sum();
            assert!(used <= budget, "{used} diversions");
            let steps = out.threshold / delta;
            assert_eq!(steps, steps.round(), "threshold {} with delta {delta}", out.threshold);
            assert!(out.alpha_q == 1.0 || out.alpha_q % 2.0 == 0.0, "alpha_q {}", out.alpha_q);
        }
    }
}

#[test]
fn one_genie_fix_is_one_diversion() {
    let code = pac(128, 64);
    let cs = code.profile().critical();
    let fano = FanoDecoder::new(code.clone(), FanoConfig::constrained().unguarded(), CheckRule::MinSum);
    let mut checked = 0;
    for f in 0..4000 {
        let frame = make_frame(&code, 3.0, 37, f);
        let fixes = genie_corrections(&code, &frame.llrs, &frame.v, CheckRule::MinSum);
        if fixes.len() != 1 || !cs[fixes[0]] {
            continue;
        }
        let out = fano.decode_full(&frame.llrs);
        if out.v_hat != frame.v {
            continue;
        }
        let expect: Vec<u8> = (0..code.info_len()).map(|j| u8::from(j == fixes[0])).collect();
        assert_eq!(out.diversions, expect, "frame {f}");
        checked += 1;
    }
    assert!(checked >= 20, "only {checked} frames with a single critical error");
}

#[test]
fn list_search_prefers_forced_prefix() {
    let code = pac(32, 16);
    let list = ListDecoder::new(code.clone(), 16, CheckRule::MinSum).crc_aided(false);
    let llrs = vec![1.0; 32];
    let info = code.profile().info_set();
    let mut forced = vec![None; 32];
    forced[info[0]] = Some(1);
    let (cands, _) = list.decode_list(&llrs, Some(&forced));
    assert!(cands.iter().all(|c| c.v[info[0]] == 1));
    assert!(cands.windows(2).all(|w| w[0].pm <= w[1].pm));
}
