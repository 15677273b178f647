use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phipractical"))
        .args(args)
        .env_remove("PHIPRACTICAL_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn table_prefix() {
    let o = run(&["table", "phi", "--pow10", "1..6"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let counts: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(counts, ["6", "28", "174", "1198", "9301", "74461"]);
}

#[test]
fn output_is_independent_of_threads() {
    let args = ["table", "phi", "--pow2", "10..20"];
    let one = run(&[&["--threads", "1"], &args[..]].concat());
    let four = run(&[&["--threads", "4"], &args[..]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    let env = Command::new(env!("CARGO_BIN_EXE_phipractical"))
        .args(args)
        .env("PHIPRACTICAL_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(env.stdout, one.stdout);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["starter-of", "12"]).status.code(), Some(0));
    assert_eq!(run(&["starter-of", "7"]).status.code(), Some(2));
    assert_eq!(run(&["classify"]).status.code(), Some(2));
    assert_eq!(
        run(&["list", "phi", "--limit", "100000000000"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        run(&["--threads", "0", "omega", "2"]).status.code(),
        Some(2)
    );
}

#[test]
fn fit_round_trip_and_malformed_input() {
    let dir = std::env::temp_dir().join(format!("phipractical-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let series = dir.join("series.csv");
    let o = run(&[
        "table",
        "phi",
        "--pow2",
        "10..22",
        "--output",
        series.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let fit = run(&["fit", series.to_str().unwrap(), "--starts", "grid"]);
    assert!(
        fit.status.success(),
        "{}",
        String::from_utf8_lossy(&fit.stderr)
    );
    let json: serde_json::Value = serde_json::from_slice(&fit.stdout).unwrap();
    assert!(json["C"].is_f64());
    assert!(json["metadata"]["optimizer"].is_string());
    assert_eq!(json["residuals"].as_array().unwrap().len(), 13);

    let bad = dir.join("bad.csv");
    std::fs::write(&bad, "v,count,ratio\n10,x,1.0\n").unwrap();
    assert_eq!(run(&["fit", bad.to_str().unwrap()]).status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn verify_suites() {
    let o = run(&["verify", "bm-identity", "--m", "1", "--x", "100000"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("PASS"));
    let o = run(&["verify", "startercond", "--limit", "100000"]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["verify", "lemma52", "--nmax", "100000"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn starter_catalog() {
    let o = run(&["starters", "--limit", "10000", "--squarefull", "49"]);
    assert_eq!(
        stdout(&o),
        "m,squarefull_part,alpha,H_num,H_den\n294,49,6,295,84\n735,49,15,46,21\n1470,49,30,1471,336\n"
    );
}
