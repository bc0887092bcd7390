use std::path::Path;
use std::process::{Command, Output};

fn pactree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pactree")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn profile_prints_header_and_indices() {
    let text = stdout(&pactree(&["profile", "--n", "8", "--k", "4"]));
    assert_eq!(text, "8 4\n3\n5\n6\n7\n");
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.conf", "# small code\nn = 64\nk = 32\nprofile = rm\n");
    let from_file = stdout(&pactree(&["profile", "--config", &cfg]));
    assert!(from_file.starts_with("64 32\n"));
    let overridden = stdout(&pactree(&["profile", "--config", &cfg, "--k", "16"]));
    assert!(overridden.starts_with("64 16\n"));
}

#[test]
fn saved_profiles_load_back() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&pactree(&["profile", "--n", "32", "--k", "16", "--profile", "dega"]));
    let path = write(dir.path(), "p.txt", &text);
    assert_eq!(stdout(&pactree(&["profile", "--code", &path])), text);
}

#[test]
fn bad_configuration_fails_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let cases: Vec<Vec<String>> = vec![
        vec!["simulate".into(), "--decoder".into(), "viterbi".into()],
        vec!["profile".into(), "--n".into(), "100".into()],
        vec!["profile".into(), "--config".into(), write(dir.path(), "bad.conf", "just words\n")],
        vec!["profile".into(), "--config".into(), dir.path().join("missing.conf").display().to_string()],
        vec!["simulate".into(), "--snr-start".into(), "3".into(), "--snr-stop".into(), "2".into()],
        vec!["simulate".into(), "--cs".into(), "maybe".into()],
    ];
    for args in cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = pactree(&args);
        assert!(!out.status.success(), "{args:?} succeeded");
        assert!(!out.stderr.is_empty(), "{args:?} printed nothing");
    }
}

#[test]
fn simulation_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("r.csv").display().to_string();
    let args = [
        "simulate", "--n", "64", "--k", "32", "--decoder", "fano", "--snr-start", "1.5", "--snr-stop", "2.5",
        "--min-errors", "10", "--max-frames", "2000", "--seed", "5", "--wall-time", "off", "--out", &out_path,
    ];
    let first = pactree(&args);
    let printed = stdout(&first);
    assert!(String::from_utf8_lossy(&first.stderr).contains("fewer than 100"));
    let file = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(printed, file);
    assert_eq!(printed.lines().count(), 4);
    assert_eq!(stdout(&pactree(&args)), printed);
}

#[test]
fn json_results_embed_the_campaign() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("r.json").display().to_string();
    let args = [
        "simulate", "--n", "32", "--k", "16", "--decoder", "scl", "--list-size", "4", "--max-frames", "200",
        "--min-errors", "0", "--format", "json", "--out", &out_path,
    ];
    stdout(&pactree(&args));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(doc["campaign"]["decoder"]["kind"], "scl");
    assert_eq!(doc["records"][0]["frames"], 200);
}

#[test]
fn spectrum_of_a_small_code() {
    let text = stdout(&pactree(&["spectrum", "--n", "16", "--k", "8", "--list-size", "1024"]));
    assert_eq!(text, "weight,count\n4,28\n8,198\n");
}

#[test]
fn genie_histogram_reports_counts() {
    let out = pactree(&["genie-hist", "--n", "64", "--k", "32", "--snr", "1.0", "--failures", "50"]);
    let text = stdout(&out);
    let total: u64 = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(total, 50);
    assert!(String::from_utf8_lossy(&out.stderr).contains("50 failures"));
}
