use std::process::{Command, Output};

fn tracecc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tracecc")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = tracecc(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    serde_json::from_str(&stdout(args)).unwrap()
}

#[test]
fn rule_info_reports_permutivity() {
    let v = json(&["rule", "info", "90"]);
    assert_eq!(v["rule"], "90");
    assert_eq!(v["permutivity"], "bi");
}

#[test]
fn cc_reports_bounds() {
    let v = json(&["cc", "90", "--n", "3", "--z", "0000"]);
    assert_eq!(v["left_cc_bits"], 3);
    assert_eq!(v["multiround_exact_bits"], 3);
    let v = json(&["cc", "g90", "--n", "2", "--z", "000"]);
    assert!(v["left_cc_bits"].as_u64().unwrap() <= 1);
}

#[test]
fn protocol_verification_and_transcript() {
    let table = stdout(&["protocol", "stagnating-pair", "232", "--n", "4"]);
    assert!(table.lines().nth(1).unwrap().split_whitespace().any(|c| c == "true"));
    assert_eq!(
        stdout(&["protocol", "stagnating-pair", "232", "--n", "2", "--transcript", "01,10"]),
        "bob:1\nanswer:alice:1\n"
    );
    let out = tracecc(&["protocol", "spreading", "90", "--n", "2"]);
    assert!(!out.status.success());
}

#[test]
fn fooling_modes() {
    let v = json(&["fooling", "146", "--n", "8", "--mode", "legal:corollary"]);
    assert_eq!(v["size"], 4);
    assert_eq!(v["bound_bits"], 2);
    let v = json(&["fooling", "90", "--n", "3", "--mode", "wz"]);
    assert_eq!(v["size"], 8);
    let v = json(&["fooling", "90", "--n", "3", "--mode", "exact"]);
    assert_eq!(v["bound_bits"], 3);
    assert!(!tracecc(&["fooling", "90", "--n", "3", "--mode", "bogus"]).status.success());
}

#[test]
fn expansivity_with_sigma_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sigma.txt");
    std::fs::write(&path, "@alphabet 2\n# no forbidden words\n").unwrap();
    let v = json(&["expansivity", "150", "--sigma", path.to_str().unwrap(), "--tmax", "3"]);
    assert_eq!(v[0]["result"]["t"], 1);
    assert_eq!(v[1]["result"]["t"], 1);
    let v = json(&["expansivity", "204", "--tmax", "2"]);
    assert_eq!(v[1]["result"]["kind"], "refuted");
}

#[test]
fn entropy_csv() {
    let out = stdout(&["entropy", "90", "--width", "1", "--nmax", "3"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "rule,k,n,count,slope");
    assert_eq!(lines[3], "90,1,3,16,1.333333");
}

#[test]
fn survey_matrix_and_group_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    stdout(&["survey", "--n", "2", "--z", "sample:3:9", "--rules", "0-3,110", "--out", csv.to_str().unwrap()]);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("tracecc-v1,rule,"));
    assert_eq!(text.lines().count(), 1 + 5 * 3);

    let pgm = dir.path().join("m.pgm");
    stdout(&["matrix", "30", "--n", "3", "--pgm", pgm.to_str().unwrap()]);
    let bytes = std::fs::read(&pgm).unwrap();
    assert!(bytes.starts_with(b"P5\n8 8\n255\n"));
    assert_eq!(bytes.len(), b"P5\n8 8\n255\n".len() + 64);

    let table = dir.path().join("g90.txt");
    std::fs::write(&table, stdout(&["group", "90"])).unwrap();
    let a = json(&["cc", table.to_str().unwrap(), "--n", "2"]);
    let b = json(&["cc", "g90", "--n", "2"]);
    assert_eq!(a["distinct_rows"], b["distinct_rows"]);
}

#[test]
fn bad_input_is_rejected() {
    assert!(!tracecc(&["cc", "300", "--n", "2"]).status.success());
    assert!(!tracecc(&["cc", "90", "--n", "2", "--z", "01"]).status.success());
    assert!(!tracecc(&["matrix", "90", "--n", "2"]).status.success());
}
