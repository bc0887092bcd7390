use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use pactree::analysis::{genie_error_histogram, spectrum_scl};
use pactree::construction::{load_profile, CriticalSetMode, ProfileKind};
use pactree::sim::{self, Campaign, OutputFormat, StopRule, CSV_HEADER};
use pactree::{CheckRule, CodeConfig, CrcSpec, DecoderConfig, FanoConfig, GeneratorPolynomial, MetricKind, StackConfig};

#[derive(Parser)]
#[command(name = "pactree", version, about = "PAC and polar code simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo FER/BER and complexity over an SNR grid.
    Simulate(SimulateArgs),
    /// Low-weight distance spectrum by list-decoding search.
    Spectrum(SpectrumArgs),
    /// Print a rate profile (`N K` header, then one index per line).
    Profile(ProfileArgs),
    /// Histogram of genie-corrected SC errors per failed frame.
    GenieHist(GenieArgs),
}

#[derive(Args, Default)]
struct CodeArgs {
    /// Flat `key = value` configuration file; command-line flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Block length N.
    #[arg(long)]
    n: Option<String>,
    /// Data bits K.
    #[arg(long)]
    k: Option<String>,
    /// rm | dega | pw | pw-modified
    #[arg(long)]
    profile: Option<String>,
    /// Design Eb/N0 for profile construction (dB).
    #[arg(long)]
    design_snr: Option<String>,
    /// Rate-profile file; overrides --n/--k/--profile.
    #[arg(long)]
    code: Option<PathBuf>,
    /// Convolution generator in octal; 1 gives a polar code.
    #[arg(long)]
    g: Option<String>,
    /// CRC as a hex literal (0xA6) or `off`.
    #[arg(long)]
    crc: Option<String>,
    /// CRC generator as a binary string, leading 1 included.
    #[arg(long)]
    crc_poly: Option<String>,
    /// Design Eb/N0 of the Fano bias tables (dB).
    #[arg(long)]
    bias_snr: Option<String>,
    /// heads | least-reliable:<q>
    #[arg(long)]
    cs_mode: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long)]
    snr_start: Option<String>,
    #[arg(long)]
    snr_stop: Option<String>,
    #[arg(long)]
    snr_step: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// sc | scl | stack | fano
    #[arg(long)]
    decoder: Option<String>,
    #[arg(long)]
    list_size: Option<String>,
    #[arg(long)]
    stack_depth: Option<String>,
    /// Fano threshold step.
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    delta_q: Option<String>,
    #[arg(long)]
    ibu: Option<String>,
    /// Maximum diversions, or `off`.
    #[arg(long)]
    max_div: Option<String>,
    /// on | off
    #[arg(long)]
    cs: Option<String>,
    /// on | off
    #[arg(long)]
    topdown: Option<String>,
    /// on | off
    #[arg(long)]
    adaptive: Option<String>,
    /// on | off
    #[arg(long)]
    one_shot: Option<String>,
    /// on | off
    #[arg(long)]
    refresh: Option<String>,
    /// approx | exact
    #[arg(long)]
    metric: Option<String>,
    /// min-sum | exact
    #[arg(long)]
    f_rule: Option<String>,
    #[arg(long)]
    min_errors: Option<String>,
    #[arg(long)]
    max_frames: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv | json
    #[arg(long)]
    format: Option<String>,
    /// on | off; off writes 0 in the wall_seconds column.
    #[arg(long)]
    wall_time: Option<String>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long)]
    list_size: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenieArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long)]
    snr: Option<String>,
    #[arg(long)]
    failures: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    max_frames: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Effective settings: defaults, overridden by the config file, overridden by
/// flags.
struct Settings {
    map: BTreeMap<String, String>,
}

impl Settings {
    fn load(config: Option<&Path>) -> Result<Self> {
        let map = match config {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                sim::parse_kv(&text)?
            }
            None => BTreeMap::new(),
        };
        Ok(Self { map })
    }

    fn set(&mut self, key: &str, value: &Option<String>) {
        if let Some(v) = value {
            self.map.insert(key.to_string(), v.clone());
        }
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            Some(v) => v.parse().map(Some).map_err(|_| anyhow!("invalid value \"{v}\" for {key}")),
            None => Ok(None),
        }
    }

    fn or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn flag(&self, key: &str, default: bool) -> Result<bool> {
        match self.raw(key) {
            None => Ok(default),
            Some("on" | "true" | "yes" | "1") => Ok(true),
            Some("off" | "false" | "no" | "0") => Ok(false),
            Some(v) => bail!("invalid value \"{v}\" for {key}: expected on or off"),
        }
    }
}

fn settings_for(code: &CodeArgs, extra: &[(&str, &Option<String>)]) -> Result<Settings> {
    let mut s = Settings::load(code.config.as_deref())?;
    let code_path = code.code.as_ref().map(|p| p.display().to_string());
    for (key, value) in [
        ("n", &code.n),
        ("k", &code.k),
        ("profile", &code.profile),
        ("design-snr", &code.design_snr),
        ("code", &code_path),
        ("g", &code.g),
        ("crc", &code.crc),
        ("crc-poly", &code.crc_poly),
        ("bias-snr", &code.bias_snr),
        ("cs-mode", &code.cs_mode),
    ] {
        s.set(key, value);
    }
    for (key, value) in extra {
        s.set(key, value);
    }
    Ok(s)
}

fn code_config(s: &Settings) -> Result<CodeConfig> {
    let crc = match (s.raw("crc-poly"), s.raw("crc")) {
        (Some(bits), _) => Some(CrcSpec::from_binary(bits)?),
        (None, None | Some("off")) => None,
        (None, Some(lit)) => Some(lit.parse::<CrcSpec>()?),
    };
    let r = crc.as_ref().map_or(0, CrcSpec::width);
    let g: GeneratorPolynomial = s.raw("g").unwrap_or("133").parse()?;
    let (block_len, data_len, profile) = match s.raw("code") {
        Some(path) => {
            let (n, info) = load_profile(path).with_context(|| format!("loading profile {path}"))?;
            if info.len() < r {
                bail!("profile has {} information positions, fewer than the CRC width {r}", info.len());
            }
            (n, info.len() - r, ProfileKind::Explicit { info_set: info })
        }
        None => {
            let n: usize = s.or("n", 128)?;
            let k: usize = s.or("k", 64)?;
            let kind = s.raw("profile").unwrap_or("rm");
            let profile = match kind {
                "rm" => ProfileKind::Rm { design_snr_db: s.or("design-snr", 3.5)? },
                "dega" => ProfileKind::Dega { design_snr_db: s.or("design-snr", 2.0)? },
                "pw" => ProfileKind::Pw,
                "pw-modified" => ProfileKind::PwModified,
                other => bail!("unknown profile \"{other}\""),
            };
            (n, k, profile)
        }
    };
    let critical_set = match s.raw("cs-mode") {
        None | Some("heads") => CriticalSetMode::RateOneHeads,
        Some(v) => match v.strip_prefix("least-reliable:").map(str::parse::<usize>) {
            Some(Ok(q)) => CriticalSetMode::LeastReliable(q),
            _ => bail!("invalid cs-mode \"{v}\""),
        },
    };
    let cfg = CodeConfig { block_len, data_len, profile, g, crc, bias_snr_db: s.or("bias-snr", 4.0)?, critical_set };
    cfg.build().context("building the code")?;
    Ok(cfg)
}

fn decoder_config(s: &Settings) -> Result<DecoderConfig> {
    let metric = match s.raw("metric").unwrap_or("approx") {
        "approx" => MetricKind::Approx,
        "exact" => MetricKind::Exact,
        other => bail!("unknown metric \"{other}\""),
    };
    Ok(match s.raw("decoder").unwrap_or("fano") {
        "sc" => DecoderConfig::Sc,
        "scl" => DecoderConfig::Scl { list_size: s.or("list-size", 32)?, crc_aided: true },
        "stack" => DecoderConfig::Stack(StackConfig { depth: s.or("stack-depth", 256)?, metric, max_iterations: None }),
        "fano" => {
            let base = FanoConfig::constrained();
            let max_diversions = match s.raw("max-div") {
                Some("off") => None,
                Some(_) => Some(s.or("max-div", 4usize)?),
                None => base.max_diversions,
            };
            let delta: f64 = s.or("delta", base.delta)?;
            if delta <= 0.0 {
                bail!("delta must be positive");
            }
            DecoderConfig::Fano(FanoConfig {
                delta,
                delta_q: s.or("delta-q", base.delta_q)?,
                i_bu: s.get("ibu")?,
                max_diversions,
                use_critical_set: s.flag("cs", base.use_critical_set)?,
                use_top_down: s.flag("topdown", base.use_top_down)?,
                use_adaptive_bias: s.flag("adaptive", base.use_adaptive_bias)?,
                use_one_shot_threshold: s.flag("one-shot", base.use_one_shot_threshold)?,
                use_refresh: s.flag("refresh", base.use_refresh)?,
                metric,
                ..base
            })
        }
        other => bail!("unknown decoder \"{other}\""),
    })
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let out_str = a.out.as_ref().map(|p| p.display().to_string());
    let s = settings_for(
        &a.code,
        &[
            ("snr-start", &a.snr_start),
            ("snr-stop", &a.snr_stop),
            ("snr-step", &a.snr_step),
            ("seed", &a.seed),
            ("decoder", &a.decoder),
            ("list-size", &a.list_size),
            ("stack-depth", &a.stack_depth),
            ("delta", &a.delta),
            ("delta-q", &a.delta_q),
            ("ibu", &a.ibu),
            ("max-div", &a.max_div),
            ("cs", &a.cs),
            ("topdown", &a.topdown),
            ("adaptive", &a.adaptive),
            ("one-shot", &a.one_shot),
            ("refresh", &a.refresh),
            ("metric", &a.metric),
            ("f-rule", &a.f_rule),
            ("min-errors", &a.min_errors),
            ("max-frames", &a.max_frames),
            ("out", &out_str),
            ("format", &a.format),
            ("wall-time", &a.wall_time),
        ],
    )?;
    let start: f64 = s.or("snr-start", 2.5)?;
    let campaign = Campaign {
        code: code_config(&s)?,
        decoder: decoder_config(&s)?,
        check_rule: match s.raw("f-rule").unwrap_or("min-sum") {
            "min-sum" => CheckRule::MinSum,
            "exact" => CheckRule::Exact,
            other => bail!("unknown f-rule \"{other}\""),
        },
        snr_db: sim::snr_grid(start, s.or("snr-stop", start)?, s.or("snr-step", 0.5)?)?,
        stop: StopRule { min_frame_errors: s.or("min-errors", 100)?, max_frames: s.or("max-frames", 100_000)? },
        seed: s.or("seed", 1)?,
        output: s.raw("out").map(PathBuf::from),
        record_wall_time: s.flag("wall-time", true)?,
    };
    let format = match s.raw("format").unwrap_or("csv") {
        "csv" => OutputFormat::Csv,
        "json" => OutputFormat::Json,
        other => bail!("unknown format \"{other}\""),
    };
    campaign.validate()?;
    if !campaign.meets_error_floor() {
        eprintln!("note: fewer than 100 frame errors per point gives unreliable estimates");
    }

    // Rows stream to stdout as they finish; the file is written at the end.
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{CSV_HEADER}")?;
    let records = sim::run_campaign(&campaign, |r| {
        let _ = writeln!(stdout, "{}", r.csv_line());
        let _ = stdout.flush();
    })?;
    drop(stdout);
    if let Some(path) = &campaign.output {
        sim::emit_results(path, format, &campaign, &records)?;
    }
    Ok(())
}

fn spectrum(a: SpectrumArgs) -> Result<()> {
    let s = settings_for(&a.code, &[("list-size", &a.list_size)])?;
    let code = code_config(&s)?.build()?;
    let spec = spectrum_scl(&code, s.or("list-size", 1024)?);
    let mut w = open_out(&a.out)?;
    writeln!(w, "weight,count")?;
    for (d, c) in &spec.counts {
        writeln!(w, "{d},{c}")?;
    }
    w.flush()?;
    Ok(())
}

fn profile(a: ProfileArgs) -> Result<()> {
    let s = settings_for(&a.code, &[])?;
    let code = code_config(&s)?.build()?;
    let mut w = open_out(&a.out)?;
    write!(w, "{}", code.profile().to_text())?;
    w.flush()?;
    Ok(())
}

fn genie_hist(a: GenieArgs) -> Result<()> {
    let s = settings_for(
        &a.code,
        &[("snr", &a.snr), ("failures", &a.failures), ("seed", &a.seed), ("max-frames", &a.max_frames)],
    )?;
    let code = code_config(&s)?.build()?;
    let hist = genie_error_histogram(
        &code,
        s.or("snr", 2.5)?,
        s.or("failures", 1000)?,
        s.or("seed", 1)?,
        s.or("max-frames", 10_000_000)?,
    );
    let mut w = open_out(&a.out)?;
    writeln!(w, "errors,count")?;
    for (e, c) in &hist.counts {
        writeln!(w, "{e},{c}")?;
    }
    w.flush()?;
    eprintln!(
        "{} failures in {} frames; {:.2}% with at most 5 errors",
        hist.failures,
        hist.frames,
        100.0 * hist.fraction_at_most(5)
    );
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate(a) => simulate(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Profile(a) => profile(a),
        Command::GenieHist(a) => genie_hist(a),
    }
}
