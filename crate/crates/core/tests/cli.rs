use std::process::{Command, Output};

fn gpb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpb")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

const EXAMPLE: [&str; 6] = ["--pp", "0.1,0.2,0.3", "--aval", "1,2,3", "--bval", "2,3,4"];

#[test]
fn cdf_over_a_range() {
    let mut args = vec!["cdf"];
    args.extend(EXAMPLE);
    args.extend(["--kk", "6:9"]);
    let text = stdout(&gpb(&args));
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let got: Vec<(f64, f64)> = rows.deserialize().map(Result::unwrap).collect();
    let want = [(6.0, 0.504), (7.0, 0.902), (8.0, 0.994), (9.0, 1.0)];
    for ((x, f), (wx, wf)) in got.iter().zip(want) {
        assert_eq!(*x, wx);
        assert!((f - wf).abs() < 1e-12);
    }
}

#[test]
fn params_file_and_json_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    std::fs::write(&path, r#"{"pp":[0.5,0.5],"aval":[-0.5,0],"bval":[0.5,1],"digits":1}"#).unwrap();
    let text = stdout(&gpb(&["--json", "quantile", "--params", path.to_str().unwrap(), "--q", "0.1,0.5,1"]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let xs: Vec<f64> = v.as_array().unwrap().iter().map(|r| r["x"].as_f64().unwrap()).collect();
    assert_eq!(xs, vec![-0.5, 0.5, 1.5]);
}

#[test]
fn samples_are_reproducible() {
    let mut args = vec!["sample", "--count", "50", "--seed", "4"];
    args.extend(EXAMPLE);
    assert_eq!(stdout(&gpb(&args)), stdout(&gpb(&args)));
}

#[test]
fn invalid_input_reports_machine_readable_error() {
    let out = gpb(&["pmf", "--pp", "1.5", "--aval", "0", "--bval", "1"]);
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "probability_out_of_range");
}

#[test]
fn oracle_validation_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    std::fs::write(
        &path,
        r#"{"seed": 3, "instances": [{"n":8,"a":5,"b":9,"min_p":0.1,"max_p":0.9}]}"#,
    )
    .unwrap();
    let text = stdout(&gpb(&["validate", "oracle", "--config", path.to_str().unwrap()]));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,a,b,min_p,max_p,mae,tae"));
    let mae: f64 = lines.next().unwrap().split(',').nth(5).unwrap().parse().unwrap();
    assert!(mae <= 1e-12);
}

#[test]
fn bench_writes_its_header() {
    let text = stdout(&gpb(&["bench", "--ns", "10", "--ms", "20,40", "--repeats", "1"]));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m,n,seconds,repeats"));
    assert_eq!(lines.count(), 2);
}
