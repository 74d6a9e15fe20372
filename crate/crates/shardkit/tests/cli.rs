mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use shardkit::dsl::scheme_to_dsl;

use common::*;

fn cli() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_shardkit"));
    cmd.env_remove("SHARDKIT_SEED");
    cmd
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

struct Dealt {
    _dir: tempfile::TempDir,
    spec: PathBuf,
    out: PathBuf,
}

fn deal_vault(seed: &str) -> Dealt {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("scheme.txt");
    fs::write(&spec, scheme_to_dsl(&vault_scheme())).unwrap();
    let out = dir.path().join("shares");
    let status = cli()
        .args(["deal", "--spec"])
        .arg(&spec)
        .args([
            "--secret", "1234", "--prime", "8191", "--seed", seed, "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    Dealt {
        _dir: dir,
        spec,
        out,
    }
}

fn reconstruct(spec: &Path, shares: &[PathBuf]) -> Output {
    let mut cmd = cli();
    cmd.args(["reconstruct", "--spec"]).arg(spec);
    for share in shares {
        cmd.arg(share);
    }
    cmd.output().unwrap()
}

fn share_files(dealt: &Dealt, holders: &[&str]) -> Vec<PathBuf> {
    holders
        .iter()
        .map(|h| dealt.out.join(format!("{h}.share")))
        .collect()
}

#[test]
fn deal_writes_one_share_file_per_holder_plus_metadata() {
    let dealt = deal_vault("1");
    let mut names: Vec<String> = fs::read_dir(&dealt.out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "m1.share",
            "m2.share",
            "m3.share",
            "metadata.txt",
            "o.share",
            "s1.share",
            "s2.share",
            "s3.share",
            "sec.share"
        ]
    );
    let metadata = fs::read_to_string(dealt.out.join("metadata.txt")).unwrap();
    assert!(metadata.starts_with("p=8191\nscheme="));
    assert!(metadata.contains("holder=o paths=0\n"));
}

#[test]
fn same_seed_gives_byte_identical_outputs() {
    let a = deal_vault("42");
    let b = deal_vault("42");
    let c = deal_vault("43");
    for holder in ["o", "sec", "m1", "s3"] {
        let file = format!("{holder}.share");
        assert_eq!(
            fs::read(a.out.join(&file)).unwrap(),
            fs::read(b.out.join(&file)).unwrap()
        );
    }
    assert_ne!(
        fs::read(a.out.join("m1.share")).unwrap(),
        fs::read(c.out.join("m1.share")).unwrap()
    );
}

#[test]
fn seed_env_fallback_matches_the_flag() {
    let flagged = deal_vault("77");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("shares");
    let status = cli()
        .env("SHARDKIT_SEED", "77")
        .args(["deal", "--spec"])
        .arg(&flagged.spec)
        .args(["--secret", "1234", "--prime", "8191", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(
        fs::read(flagged.out.join("o.share")).unwrap(),
        fs::read(out.join("o.share")).unwrap()
    );
}

#[test]
fn reconstruct_prints_the_secret() {
    let dealt = deal_vault("5");
    let output = reconstruct(&dealt.spec, &share_files(&dealt, &["o", "sec", "m1", "m3"]));
    assert!(output.status.success());
    assert_eq!(stdout(&output).trim(), "1234");
}

#[test]
fn malformed_scheme_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("scheme.txt");
    fs::write(&spec, "threshold(k=2) { leaf a").unwrap();
    let status = cli()
        .args(["deal", "--spec"])
        .arg(&spec)
        .args(["--secret", "1", "--prime", "7", "--out"])
        .arg(dir.path().join("x"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn mismatched_scheme_exits_2() {
    let dealt = deal_vault("6");
    let other_spec = dealt.spec.parent().unwrap().join("other.txt");
    fs::write(&other_spec, scheme_to_dsl(&plain_two_of_seven())).unwrap();
    let output = reconstruct(&other_spec, &share_files(&dealt, &["o", "sec", "m1", "m2"]));
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn out_of_field_secret_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("scheme.txt");
    fs::write(&spec, scheme_to_dsl(&vault_scheme())).unwrap();
    let status = cli()
        .args(["deal", "--spec"])
        .arg(&spec)
        .args(["--secret", "7", "--prime", "7", "--out"])
        .arg(dir.path().join("x"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
    let status = cli()
        .args(["deal", "--spec"])
        .arg(&spec)
        .args(["--secret", "1", "--prime", "8192", "--out"])
        .arg(dir.path().join("x"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn missing_crucial_share_exits_4() {
    let dealt = deal_vault("8");
    let output = reconstruct(
        &dealt.spec,
        &share_files(&dealt, &["sec", "m1", "m2", "m3"]),
    );
    assert_eq!(output.status.code(), Some(4));
}

#[test]
fn insufficient_shares_exit_5() {
    let dealt = deal_vault("9");
    let output = reconstruct(&dealt.spec, &share_files(&dealt, &["o", "sec", "s1", "s2"]));
    assert_eq!(output.status.code(), Some(5));
}

#[test]
fn tampered_share_exits_6() {
    let dealt = deal_vault("10");
    // flip m1's value while keeping the record well-formed
    let file = dealt.out.join("m1.share");
    let line = fs::read_to_string(&file).unwrap();
    let tampered = regex_free_bump_value(line.trim());
    fs::write(&file, format!("{tampered}\n")).unwrap();
    let output = reconstruct(
        &dealt.spec,
        &share_files(&dealt, &["o", "sec", "m1", "m2", "m3"]),
    );
    assert_eq!(output.status.code(), Some(6));
}

fn regex_free_bump_value(line: &str) -> String {
    line.split(' ')
        .map(|field| match field.strip_prefix("value=") {
            Some(v) => {
                let v: u64 = v.parse().unwrap();
                format!("value={}", (v + 1) % 8191)
            }
            None => field.to_string(),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

#[test]
fn enumeration_limit_exits_7() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("scheme.txt");
    let leaves: String = (0..21).map(|i| format!("  leaf h{i}\n")).collect();
    fs::write(&spec, format!("threshold(k=2) {{\n{leaves}}}\n")).unwrap();
    let formula = dir.path().join("formula.txt");
    let ids: Vec<String> = (0..21).map(|i| format!("h{i}")).collect();
    fs::write(&formula, format!("thr(2; {})", ids.join(", "))).unwrap();
    let status = cli()
        .args(["verify", "--spec"])
        .arg(&spec)
        .arg("--formula")
        .arg(&formula)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(7));
}

#[test]
fn count_reports_the_vault_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let formula = dir.path().join("formula.txt");
    fs::write(&formula, VAULT_FORMULA).unwrap();
    let output = cli()
        .args(["count", "--formula"])
        .arg(&formula)
        .output()
        .unwrap();
    assert!(output.status.success());
    assert_eq!(stdout(&output).trim(), "naive=48 factored=26 compiled=8");
}

#[test]
fn compile_then_verify_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let formula = dir.path().join("formula.txt");
    fs::write(&formula, "or(and(a, b), and(b, c), and(c, d))").unwrap();
    let compiled = dir.path().join("scheme.txt");
    let output = cli()
        .args(["compile", "--formula"])
        .arg(&formula)
        .arg("--out")
        .arg(&compiled)
        .output()
        .unwrap();
    assert!(output.status.success());
    assert!(stdout(&output).starts_with("flattened=false ideal=false"));

    let output = cli()
        .args(["verify", "--spec"])
        .arg(&compiled)
        .arg("--formula")
        .arg(&formula)
        .output()
        .unwrap();
    assert!(output.status.success());
    assert_eq!(stdout(&output).trim(), "equivalent=true flattened=false");
}

#[test]
fn verify_prints_a_counterexample_and_fails_on_inequivalence() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("scheme.txt");
    fs::write(&spec, scheme_to_dsl(&plain_two_of_seven())).unwrap();
    let formula = dir.path().join("formula.txt");
    fs::write(&formula, "and(o, m1)").unwrap();
    let output = cli()
        .args(["verify", "--spec"])
        .arg(&spec)
        .arg("--formula")
        .arg(&formula)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let text = stdout(&output);
    assert!(text.starts_with("equivalent=false flattened=true"));
    assert!(text.contains("counterexample="));
}

#[test]
fn perfect_reports_uniform_for_an_unauthorized_subset() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("scheme.txt");
    fs::write(&spec, scheme_to_dsl(&vault_scheme())).unwrap();
    let output = cli()
        .args(["perfect", "--spec"])
        .arg(&spec)
        .args([
            "--prime",
            "7",
            "--subset",
            "o,sec,s1,s2,s3",
            "--secret",
            "3",
            "--seed",
            "11",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = stdout(&output);
    assert!(text.contains("secret=0 count="));
    assert!(text.ends_with("authorized=false uniform=true\n"));
}
