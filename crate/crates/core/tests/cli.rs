use std::io::Write;
use std::process::{Command, Output, Stdio};

fn satrna(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_satrna"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn order_and_check() {
    let o = satrna(&["order", "((..(((......))).))", "(.)(.)", "((.)(.))"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "1\n1\n2\n");
    let o = satrna(&["check", "(.)...", "(.)..", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["saturated"], false);
    assert_eq!(v[0]["addable"], serde_json::json!([[4, 6]]));
    assert_eq!(v[1]["saturated"], true);
}

#[test]
fn structures_from_stdin_file() {
    let path = std::env::temp_dir().join(format!("satrna-cli-{}.txt", std::process::id()));
    std::fs::File::create(&path)
        .unwrap()
        .write_all(b"(.)\n((.)(.))\n")
        .unwrap();
    let o = satrna(&["order", "--file", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(stdout(&o), "1\n2\n");
}

#[test]
fn count_json_is_decimal_strings() {
    let o = satrna(&["count", "--max-n", "8", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v.to_string().contains("\"18\""));
}

#[test]
fn spectrum_csv_header() {
    let o = satrna(&["spectrum", "--trunc", "20", "--format", "csv"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("n,p,count\n"));
}

#[test]
fn numeric_verbs_succeed() {
    for args in [
        &["dist", "--n", "30"][..],
        &["expect", "--n", "16", "--n", "64"],
        &["tail", "--n", "64", "--x", "1", "--x", "1/2"],
        &["singularity", "--precision", "8"],
        &["enumerate", "--n", "6"],
        &["census", "--n", "10", "--format", "json"],
        &["sample", "--n", "40", "--seed", "3", "--count", "2"],
    ] {
        let o = satrna(args);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stdout.is_empty());
    }
}

#[test]
fn error_exit_codes() {
    let o = satrna(&["order", "(.(.)"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    assert_eq!(satrna(&["order", "--nope"]).status.code(), Some(2));
    assert_eq!(satrna(&["dist", "--n", "20", "--trunc", "10"]).status.code(), Some(1));
    assert_eq!(satrna(&["sample", "--n", "0"]).status.code(), Some(1));
}

#[test]
fn help_goes_to_stdout() {
    let o = Command::new(env!("CARGO_BIN_EXE_satrna"))
        .arg("--help")
        .stdin(Stdio::null())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(stdout(&o).contains("Usage"));
}
