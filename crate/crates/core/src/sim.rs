//! Monte-Carlo campaigns: frame generation, decoding, accounting and result
//! files.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{bpsk_modulate, channel_llrs, random_bits, transmit, ChannelParams};
use crate::code::{CodeConfig, CodeSpec};
use crate::decoder::{DecodeOutput, Decoder, DecoderConfig};
use crate::error::{Error, Result};
use crate::kernel::CheckRule;

/// One transmitted frame and what the receiver sees.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub data: Vec<u8>,
    pub v: Vec<u8>,
    pub x: Vec<u8>,
    pub y: Vec<f64>,
    pub llrs: Vec<f64>,
}

/// Builds frame number `frame` of the stream selected by `seed`. The message
/// is drawn before the noise from the frame's own random stream.
pub fn make_frame(code: &CodeSpec, ebn0_db: f64, seed: u64, frame: u64) -> Frame {
    let params = ChannelParams::new(ebn0_db, code.rate(), seed);
    let mut rng = params.frame_rng(frame);
    let data = random_bits(code.data_len(), &mut rng);
    let cw = code.encode(&data).expect("message length matches the code");
    let sigma = params.sigma();
    let y = transmit(&bpsk_modulate(&cw.x), sigma, &mut rng);
    let llrs = channel_llrs(&y, sigma);
    Frame { data, v: cw.v, x: cw.x, y, llrs }
}

/// Processes frames `0, 1, 2, ...` in parallel batches and feeds the results
/// to `consume` strictly in frame order until it returns `false` or
/// `max_frames` is reached. The outcome does not depend on the number of
/// worker threads.
pub(crate) fn ordered_frames<T, F, C>(max_frames: u64, compute: F, mut consume: C)
where
    T: Send,
    F: Fn(u64) -> T + Sync,
    C: FnMut(T) -> bool,
{
    let batch = (16 * rayon::current_num_threads()).max(32) as u64;
    let mut next = 0u64;
    while next < max_frames {
        let end = (next + batch).min(max_frames);
        let results: Vec<T> = (next..end).into_par_iter().map(&compute).collect();
        for r in results {
            if !consume(r) {
                return;
            }
        }
        next = end;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopRule {
    /// Stop once this many frame errors were seen; 0 runs to `max_frames`.
    pub min_frame_errors: u64,
    pub max_frames: u64,
}

/// One row of results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimRecord {
    pub ebn0_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub fer: f64,
    pub ber: f64,
    pub avg_time_steps: f64,
    pub avg_operations: f64,
    pub wall_seconds: f64,
}

pub const CSV_HEADER: &str = "ebn0_db,frames,frame_errors,bit_errors,fer,ber,avg_time_steps,avg_operations,wall_seconds";

impl SimRecord {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.ebn0_db,
            self.frames,
            self.frame_errors,
            self.bit_errors,
            self.fer,
            self.ber,
            self.avg_time_steps,
            self.avg_operations,
            self.wall_seconds
        )
    }
}

/// Frame-error flag and bit-error count of one decoded frame.
pub fn frame_errors(code: &CodeSpec, frame: &Frame, out: &DecodeOutput) -> (bool, u64) {
    let decoded = code.data_bits(&out.v_hat);
    let bits = decoded.iter().zip(&frame.data).filter(|(a, b)| a != b).count() as u64;
    (bits > 0 || !out.converged, bits)
}

/// Simulates one Eb/N0 point.
pub fn simulate_point(
    code: &CodeSpec,
    decoder: &dyn Decoder,
    ebn0_db: f64,
    seed: u64,
    stop: StopRule,
    record_wall_time: bool,
) -> SimRecord {
    let started = Instant::now();
    let mut frames = 0u64;
    let mut frame_errors_total = 0u64;
    let mut bit_errors = 0u64;
    let mut time_steps = 0u128;
    let mut operations = 0u128;
    ordered_frames(
        stop.max_frames,
        |f| {
            let frame = make_frame(code, ebn0_db, seed, f);
            let out = decoder.decode(&frame.llrs);
            let (fe, be) = frame_errors(code, &frame, &out);
            (fe, be, out.counters)
        },
        |(fe, be, c)| {
            frames += 1;
            frame_errors_total += u64::from(fe);
            bit_errors += be;
            time_steps += u128::from(c.time_steps);
            operations += u128::from(c.operations);
            stop.min_frame_errors == 0 || frame_errors_total < stop.min_frame_errors
        },
    );
    let denom = frames.max(1) as f64;
    SimRecord {
        ebn0_db,
        frames,
        frame_errors: frame_errors_total,
        bit_errors,
        fer: frame_errors_total as f64 / denom,
        ber: bit_errors as f64 / (denom * code.data_len().max(1) as f64),
        avg_time_steps: time_steps as f64 / denom,
        avg_operations: operations as f64 / denom,
        wall_seconds: if record_wall_time { started.elapsed().as_secs_f64() } else { 0.0 },
    }
}

/// Evenly spaced grid from `start` to `stop` inclusive.
pub fn snr_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return Err(Error::Config("SNR grid values must be finite".into()));
    }
    if stop < start {
        return Err(Error::Config(format!("snr stop {stop} is below start {start}")));
    }
    if step <= 0.0 {
        if stop == start {
            return Ok(vec![start]);
        }
        return Err(Error::Config("snr step must be positive".into()));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

/// Everything needed to reproduce a simulation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Campaign {
    pub code: CodeConfig,
    pub decoder: DecoderConfig,
    #[serde(default)]
    pub check_rule: CheckRule,
    pub snr_db: Vec<f64>,
    pub stop: StopRule,
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// When false the wall-clock column is written as 0 so that repeated
    /// runs produce identical files.
    #[serde(default = "record_wall_default")]
    pub record_wall_time: bool,
}

fn record_wall_default() -> bool {
    true
}

impl Campaign {
    pub fn validate(&self) -> Result<()> {
        if self.snr_db.is_empty() {
            return Err(Error::Config("empty SNR grid".into()));
        }
        if self.stop.max_frames == 0 {
            return Err(Error::Config("max_frames must be positive".into()));
        }
        if self.code.data_len > self.code.block_len {
            return Err(Error::Config("K exceeds N".into()));
        }
        Ok(())
    }

    /// Points with fewer than 100 frame errors are too noisy to report.
    pub fn meets_error_floor(&self) -> bool {
        self.stop.min_frame_errors >= 100
    }
}

/// Runs every SNR point in order, handing each row to `on_record` as soon as
/// it is complete.
pub fn run_campaign(campaign: &Campaign, mut on_record: impl FnMut(&SimRecord)) -> Result<Vec<SimRecord>> {
    campaign.validate()?;
    let code = Arc::new(campaign.code.build()?);
    let decoder = campaign.decoder.build(code.clone(), campaign.check_rule);
    let mut records = Vec::with_capacity(campaign.snr_db.len());
    for &snr in &campaign.snr_db {
        let rec = simulate_point(&code, decoder.as_ref(), snr, campaign.seed, campaign.stop, campaign.record_wall_time);
        on_record(&rec);
        records.push(rec);
    }
    Ok(records)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

pub fn write_csv<W: Write>(mut w: W, records: &[SimRecord]) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(w, "{}", r.csv_line())?;
    }
    Ok(())
}

/// JSON document with the campaign embedded next to its results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignResults {
    pub campaign: Campaign,
    pub records: Vec<SimRecord>,
}

pub fn write_json<W: Write>(w: W, campaign: &Campaign, records: &[SimRecord]) -> Result<()> {
    let doc = CampaignResults { campaign: campaign.clone(), records: records.to_vec() };
    serde_json::to_writer_pretty(w, &doc)?;
    Ok(())
}

pub fn emit_results(path: &std::path::Path, format: OutputFormat, campaign: &Campaign, records: &[SimRecord]) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    match format {
        OutputFormat::Csv => write_csv(file, records),
        OutputFormat::Json => write_json(file, campaign, records),
    }
}

/// Parses flat `key = value` text. Blank lines and `#` comments are
/// ignored; later keys override earlier ones.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid() {
        assert_eq!(snr_grid(1.0, 2.0, 0.5).unwrap(), vec![1.0, 1.5, 2.0]);
        assert_eq!(snr_grid(2.5, 2.5, 0.0).unwrap(), vec![2.5]);
        assert!(snr_grid(2.0, 1.0, 0.5).is_err());
        assert!(snr_grid(1.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn csv_shapes() {
        let mut out = Vec::new();
        write_csv(&mut out, &[]).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn kv_parsing() {
        let map = parse_kv("# comment\nseed = 7\nlist_size=32 # trailing\n\n").unwrap();
        assert_eq!(map["seed"], "7");
        assert_eq!(map["list-size"], "32");
        assert!(parse_kv("novalue").is_err());
    }

    #[test]
    fn frames_are_independent_of_order() {
        let code = CodeConfig::pac_rm(32, 16).build().unwrap();
        let a = make_frame(&code, 2.0, 5, 3);
        let _ = make_frame(&code, 2.0, 5, 2);
        assert_eq!(a, make_frame(&code, 2.0, 5, 3));
    }
}
