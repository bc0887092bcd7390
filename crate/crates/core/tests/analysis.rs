use std::collections::BTreeMap;

use pactree::analysis::{exhaustive_spectrum, genie_error_histogram, spectrum_scl, union_bound_fer, WeightSpectrum};
use pactree::{CodeConfig, GeneratorPolynomial};

#[test]
fn pac_16_8_fixture() {
    let code = CodeConfig::pac_rm(16, 8).build().unwrap();
    assert_eq!(code.profile().info_set(), &[7, 9, 10, 11, 12, 13, 14, 15]);
    let exact = exhaustive_spectrum(&code).unwrap();
    assert_eq!(exact.counts, BTreeMap::from([(4, 28), (8, 198), (12, 28), (16, 1)]));
    assert_eq!(spectrum_scl(&code, 1 << 10), exact.truncated(8));
}

#[test]
fn list_search_finds_minimum_distance() {
    let mut codes = vec![
        CodeConfig::pac_rm(16, 8),
        CodeConfig::pac_rm(32, 16),
        CodeConfig::polar_rm(32, 16),
        CodeConfig::pac_rm(64, 16),
        CodeConfig::pac_rm(32, 10),
    ];
    let mut other_g = CodeConfig::pac_rm(32, 16);
    other_g.g = GeneratorPolynomial::parse_octal("36").unwrap();
    codes.push(other_g);
    for cfg in codes {
        let code = cfg.build().unwrap();
        let exact = exhaustive_spectrum(&code).unwrap();
        let found = spectrum_scl(&code, 1 << 10);
        let d = exact.d_min().unwrap();
        assert_eq!(found.d_min(), Some(d), "({}, {})", cfg.block_len, cfg.data_len);
        assert_eq!(found.count(d), exact.count(d), "({}, {})", cfg.block_len, cfg.data_len);
        for (&w, &a) in &found.counts {
            assert!(a <= exact.count(w), "weight {w}: {a} > {}", exact.count(w));
        }
    }
}

#[test]
fn list_search_counts_grow_with_list_size() {
    let code = CodeConfig::pac_rm(32, 16).build().unwrap();
    let small = spectrum_scl(&code, 64);
    let large = spectrum_scl(&code, 512);
    for (&w, &a) in &small.counts {
        assert!(large.count(w) >= a, "weight {w}");
    }
}

#[test]
fn union_bound_prefers_the_sparser_spectrum() {
    let pac = WeightSpectrum { counts: BTreeMap::from([(16, 3171)]) };
    let polar = WeightSpectrum { counts: BTreeMap::from([(16, 94488)]) };
    for snr in [1.0, 2.5, 4.0] {
        assert!(union_bound_fer(&pac, 0.5, snr) < union_bound_fer(&polar, 0.5, snr));
    }
    let mut last = f64::INFINITY;
    for k in 0..20 {
        let b = union_bound_fer(&pac, 0.5, 0.25 * k as f64);
        assert!(b < last);
        last = b;
    }
}

#[test]
fn genie_errors_grow_as_snr_drops() {
    let code = CodeConfig::pac_rm(64, 32).build().unwrap();
    let hi = genie_error_histogram(&code, 4.0, 200, 41, 1_000_000);
    let lo = genie_error_histogram(&code, 0.0, 200, 41, 1_000_000);
    assert_eq!(hi.failures, 200);
    assert!(lo.fraction_at_most(1) < hi.fraction_at_most(1));
    let mean = |h: &pactree::analysis::GenieHistogram| {
        h.counts.iter().map(|(&e, &c)| e as f64 * c as f64).sum::<f64>() / h.failures as f64
    };
    assert!(mean(&lo) > mean(&hi));
}
