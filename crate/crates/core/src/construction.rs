//! Rate profiles: reliability estimation, information-set selection, bias
//! tables for the Fano metric and critical sets.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Floor applied to per-bit error probabilities so `ln(1 - p_e)` stays finite
/// and nonzero.
pub const PE_FLOOR: f64 = 1e-12;

/// Bias terms are rounded to this grid so that every partial sum of them is
/// exact in double precision.
const BIAS_GRID: f64 = 4294967296.0; // 2^32

/// Noise variance of unit-energy BPSK at `ebn0_db` for code rate `rate`.
pub fn noise_variance(ebn0_db: f64, rate: f64) -> f64 {
    1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0))
}

/// Gaussian tail function `Q(x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// `ln φ(x)` with Chung's two-regime approximation: an exponential of a
/// power law below 10 and the asymptotic expansion above.
fn ln_phi(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < 10.0 {
        -0.4527 * x.powf(0.86) + 0.0218
    } else {
        -x / 4.0 + 0.5 * (std::f64::consts::PI / x).ln() + (1.0 - 10.0 / (7.0 * x)).ln()
    }
}

/// Mean LLR of the check-node combination of two bit channels with mean `z`.
fn dega_check(z: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    // 1 - (1 - φ)^2 = φ (2 - φ), kept in the log domain
    let ln_p = ln_phi(z);
    let target = ln_p + (2.0 - ln_p.exp()).ln();
    let (mut lo, mut hi) = (0.0, z);
    if ln_phi(hi) > target {
        return z;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ln_phi(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi.max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Gaussian-approximation density evolution. Returns the mean LLR of every
/// bit channel for BPSK at the given design Eb/N0 and code rate.
pub fn dega_reliability(block_len: usize, design_snr_db: f64, rate: f64) -> Result<Vec<f64>> {
    if block_len == 0 || !block_len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(block_len));
    }
    let mut means = vec![2.0 / noise_variance(design_snr_db, rate)];
    while means.len() < block_len {
        means = means.iter().flat_map(|&z| [dega_check(z), 2.0 * z]).collect();
    }
    Ok(means)
}

/// `p_e = Q(sqrt(mean / 2))`, clamped into `[PE_FLOOR, 0.5]`.
pub fn pe_from_reliability(mean_llr: f64) -> f64 {
    q_function((mean_llr.max(0.0) / 2.0).sqrt()).clamp(PE_FLOOR, 0.5)
}

/// Row weight of row `i` of the polar transform, `2^popcount(i)`.
pub fn row_weight(i: usize) -> usize {
    1 << i.count_ones()
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

fn check_k(block_len: usize, k: usize) -> Result<()> {
    if block_len == 0 || !block_len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(block_len));
    }
    if k > block_len {
        return Err(Error::InvalidArgument(format!("K = {k} exceeds N = {block_len}")));
    }
    Ok(())
}

/// Reed-Muller style selection: largest row weights first, ties broken by
/// reliability.
pub fn rm_profile(block_len: usize, k: usize, reliability: &[f64]) -> Result<Vec<usize>> {
    check_k(block_len, k)?;
    if reliability.len() != block_len {
        return Err(Error::InvalidArgument("reliability length differs from N".into()));
    }
    let mut order: Vec<usize> = (0..block_len).collect();
    order.sort_by(|&a, &b| {
        b.count_ones()
            .cmp(&a.count_ones())
            .then(reliability[b].total_cmp(&reliability[a]))
            .then(b.cmp(&a))
    });
    order.truncate(k);
    Ok(sorted(order))
}

/// Indices ordered by decreasing reliability.
pub fn dega_profile(block_len: usize, k: usize, reliability: &[f64]) -> Result<Vec<usize>> {
    check_k(block_len, k)?;
    let mut order: Vec<usize> = (0..block_len).collect();
    order.sort_by(|&a, &b| reliability[b].total_cmp(&reliability[a]).then(b.cmp(&a)));
    order.truncate(k);
    Ok(sorted(order))
}

/// Polarization weight `Σ_j b_j 2^{j/4}` over the binary digits of `i`.
pub fn polarization_weight(i: usize) -> f64 {
    (0..usize::BITS)
        .filter(|&j| i >> j & 1 == 1)
        .map(|j| 2f64.powf(j as f64 / 4.0))
        .sum()
}

fn pw_order(block_len: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..block_len).collect();
    order.sort_by(|&a, &b| polarization_weight(b).total_cmp(&polarization_weight(a)).then(b.cmp(&a)));
    order
}

pub fn pw_profile(block_len: usize, k: usize) -> Result<Vec<usize>> {
    check_k(block_len, k)?;
    let mut order = pw_order(block_len);
    order.truncate(k);
    Ok(sorted(order))
}

/// PW selection with its minimum-row-weight members swapped for the
/// highest-PW excluded indices of strictly larger row weight.
pub fn pw_modified(block_len: usize, k: usize) -> Result<Vec<usize>> {
    check_k(block_len, k)?;
    let order = pw_order(block_len);
    let (chosen, rest) = order.split_at(k);
    let Some(w_min) = chosen.iter().map(|&i| row_weight(i)).min() else {
        return Ok(Vec::new());
    };
    let removed = chosen.iter().filter(|&&i| row_weight(i) == w_min).count();
    let pool: Vec<usize> = rest.iter().copied().filter(|&i| row_weight(i) > w_min).take(removed).collect();
    if pool.len() < removed {
        return Err(Error::Construction(format!(
            "need {removed} replacements of row weight > {w_min}, only {} available",
            pool.len()
        )));
    }
    let kept = chosen.iter().copied().filter(|&i| row_weight(i) > w_min);
    Ok(sorted(kept.chain(pool).collect()))
}

/// How the critical set is derived.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriticalSetMode {
    /// First information bit of every maximal rate-1 subtree.
    #[default]
    RateOneHeads,
    /// The `q` least reliable information bits.
    LeastReliable(usize),
}

/// First leaf of every maximal all-information subtree, as flags over the
/// positions of the information set.
pub fn critical_set(block_len: usize, info_set: &[usize]) -> Vec<bool> {
    let mut is_info = vec![false; block_len];
    for &i in info_set {
        is_info[i] = true;
    }
    let mut heads = vec![false; block_len];
    fn walk(lo: usize, len: usize, is_info: &[bool], heads: &mut [bool]) {
        let slice = &is_info[lo..lo + len];
        if slice.iter().all(|&b| b) {
            heads[lo] = true;
        } else if len > 1 && slice.iter().any(|&b| b) {
            walk(lo, len / 2, is_info, heads);
            walk(lo + len / 2, len / 2, is_info, heads);
        }
    }
    if block_len > 0 {
        walk(0, block_len, &is_info, &mut heads);
    }
    info_set.iter().map(|&i| heads[i]).collect()
}

/// Flags the `q` information bits of lowest reliability.
pub fn least_reliable_set(info_set: &[usize], reliability: &[f64], q: usize) -> Vec<bool> {
    let mut order: Vec<usize> = (0..info_set.len()).collect();
    order.sort_by(|&a, &b| reliability[info_set[a]].total_cmp(&reliability[info_set[b]]).then(a.cmp(&b)));
    let mut flags = vec![false; info_set.len()];
    for &j in order.iter().take(q) {
        flags[j] = true;
    }
    flags
}

/// `ln(1 - p)` rounded to the bias grid.
pub fn bias_term(p_e: f64) -> f64 {
    ((-p_e).ln_1p() * BIAS_GRID).round() / BIAS_GRID
}

/// Expected full-path metric `B = Σ ln(1 - p_e)` and remaining-path metrics
/// `B^c_i = B - Σ_{j<=i} ln(1 - p_e)`. Terms are grid-rounded, so the tail
/// reaches exactly zero and metrics built from them cancel exactly.
pub fn bias_tables(p_e: &[f64]) -> (f64, Vec<f64>) {
    let terms: Vec<f64> = p_e.iter().map(|&p| bias_term(p)).collect();
    let total: f64 = terms.iter().sum();
    let mut rest = total;
    let tail = terms
        .iter()
        .map(|t| {
            rest -= t;
            rest
        })
        .collect();
    (total, tail)
}

/// Complete description of a rate profile and everything derived from it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateProfile {
    block_len: usize,
    info_set: Vec<usize>,
    is_info: Vec<bool>,
    reliability: Vec<f64>,
    p_e: Vec<f64>,
    bias_terms: Vec<f64>,
    bias_total: f64,
    bias_tail: Vec<f64>,
    critical: Vec<bool>,
    bias_snr_db: f64,
}

impl RateProfile {
    /// Builds a profile for `info_set`, estimating per-bit error
    /// probabilities by DEGA at `bias_snr_db` (Eb/N0 at rate `|info_set|/N`).
    pub fn new(block_len: usize, info_set: Vec<usize>, bias_snr_db: f64) -> Result<Self> {
        check_k(block_len, info_set.len())?;
        let rate = (info_set.len().max(1)) as f64 / block_len as f64;
        let reliability = dega_reliability(block_len, bias_snr_db, rate)?;
        let p_e: Vec<f64> = reliability.iter().map(|&m| pe_from_reliability(m)).collect();
        let mut profile = Self::from_parts(block_len, info_set, reliability, p_e)?;
        profile.bias_snr_db = bias_snr_db;
        Ok(profile)
    }

    /// Builds a profile from explicit reliabilities and error probabilities.
    pub fn from_parts(block_len: usize, mut info_set: Vec<usize>, reliability: Vec<f64>, p_e: Vec<f64>) -> Result<Self> {
        check_k(block_len, info_set.len())?;
        if reliability.len() != block_len || p_e.len() != block_len {
            return Err(Error::InvalidArgument("per-bit tables must have N entries".into()));
        }
        info_set.sort_unstable();
        if let Some(w) = info_set.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!("information index {} listed twice", w[0])));
        }
        if info_set.last().is_some_and(|&i| i >= block_len) {
            return Err(Error::InvalidArgument("information index out of range".into()));
        }
        let mut is_info = vec![false; block_len];
        for &i in &info_set {
            is_info[i] = true;
        }
        let bias_terms: Vec<f64> = p_e.iter().map(|&p| bias_term(p)).collect();
        let (bias_total, bias_tail) = bias_tables(&p_e);
        let critical = critical_set(block_len, &info_set);
        Ok(Self {
            block_len,
            info_set,
            is_info,
            reliability,
            p_e,
            bias_terms,
            bias_total,
            bias_tail,
            critical,
            bias_snr_db: f64::NAN,
        })
    }

    pub fn with_critical_mode(mut self, mode: CriticalSetMode) -> Self {
        self.critical = match mode {
            CriticalSetMode::RateOneHeads => critical_set(self.block_len, &self.info_set),
            CriticalSetMode::LeastReliable(q) => least_reliable_set(&self.info_set, &self.reliability, q),
        };
        self
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    /// Number of information positions (data plus CRC bits).
    pub fn info_len(&self) -> usize {
        self.info_set.len()
    }

    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    pub fn is_info(&self, i: usize) -> bool {
        self.is_info[i]
    }

    pub fn reliability(&self) -> &[f64] {
        &self.reliability
    }

    pub fn p_e(&self) -> &[f64] {
        &self.p_e
    }

    /// Grid-rounded `ln(1 - p_e,i)`.
    pub fn bias_term(&self, i: usize) -> f64 {
        self.bias_terms[i]
    }

    /// `B`.
    pub fn bias_total(&self) -> f64 {
        self.bias_total
    }

    /// `B^c_i` for `i` in `-1..N`; index `-1` is `B` itself.
    pub fn bias_tail(&self, i: isize) -> f64 {
        if i < 0 {
            self.bias_total
        } else {
            self.bias_tail[i as usize]
        }
    }

    /// Critical-set flags, indexed by position within the information set.
    pub fn critical(&self) -> &[bool] {
        &self.critical
    }

    pub fn bias_snr_db(&self) -> f64 {
        self.bias_snr_db
    }

    /// Plain-text form: `N K` header then one sorted index per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.block_len, self.info_set.len());
        for i in &self.info_set {
            let _ = writeln!(out, "{i}");
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Parses the plain-text profile format into `(N, information set)`.
pub fn parse_profile_text(text: &str) -> Result<(usize, Vec<usize>)> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::Parse("empty profile file".into()))?;
    let mut parts = header.split_whitespace().map(str::parse::<usize>);
    let (n, k) = match (parts.next(), parts.next(), parts.next()) {
        (Some(Ok(n)), Some(Ok(k)), None) => (n, k),
        _ => return Err(Error::Parse(format!("bad profile header \"{header}\""))),
    };
    let info: Vec<usize> = lines
        .map(|l| l.parse::<usize>().map_err(|_| Error::Parse(format!("bad profile index \"{l}\""))))
        .collect::<Result<_>>()?;
    check_k(n, k)?;
    if info.len() != k {
        return Err(Error::Parse(format!("profile lists {} indices, header says {k}", info.len())));
    }
    if info.windows(2).any(|w| w[0] >= w[1]) || info.last().is_some_and(|&i| i >= n) {
        return Err(Error::Parse("profile indices must be sorted, distinct and below N".into()));
    }
    Ok((n, info))
}

pub fn load_profile(path: impl AsRef<Path>) -> Result<(usize, Vec<usize>)> {
    parse_profile_text(&std::fs::read_to_string(path)?)
}

/// Named information-set constructions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileKind {
    /// Reed-Muller row weights, ties broken by DEGA at `design_snr_db`.
    Rm { design_snr_db: f64 },
    /// Most reliable bits by DEGA at `design_snr_db`.
    Dega { design_snr_db: f64 },
    Pw,
    PwModified,
    /// Explicit information set.
    Explicit { info_set: Vec<usize> },
}

impl ProfileKind {
    /// Selects `k` information positions out of `block_len`.
    pub fn info_set(&self, block_len: usize, k: usize) -> Result<Vec<usize>> {
        let rate = k.max(1) as f64 / block_len as f64;
        match self {
            ProfileKind::Rm { design_snr_db } => {
                rm_profile(block_len, k, &dega_reliability(block_len, *design_snr_db, rate)?)
            }
            ProfileKind::Dega { design_snr_db } => {
                dega_profile(block_len, k, &dega_reliability(block_len, *design_snr_db, rate)?)
            }
            ProfileKind::Pw => pw_profile(block_len, k),
            ProfileKind::PwModified => pw_modified(block_len, k),
            ProfileKind::Explicit { info_set } => {
                if info_set.len() != k {
                    return Err(Error::Construction(format!(
                        "explicit profile has {} indices, expected {k}",
                        info_set.len()
                    )));
                }
                Ok(sorted(info_set.clone()))
            }
        }
    }
}
