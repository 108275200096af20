use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sensorsim"))
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("spawn sensorsim")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const STATES: &str = "state,door_ON,door_OFF,lamp_ON,lamp_OFF";

fn matrix(dir: &Path, name: &str, lamp_bias: f64) -> String {
    let other = 1.0 - lamp_bias;
    let body = format!(
        "{STATES}\n\
         door_ON,0,0.9,0.1,0\n\
         door_OFF,{other},0,{lamp_bias},0\n\
         lamp_ON,0,0,0,1\n\
         lamp_OFF,{other},0,{lamp_bias},0\n"
    );
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.display().to_string()
}

fn matrix_args(dir: &Path) -> Vec<String> {
    let acts = dir.join("activities.csv");
    fs::write(
        &acts,
        "activity,type,sensor,mean_seconds,sd_seconds\n\
         door_ON,ON,door,30,5\n\
         door_OFF,OFF,door,900,120\n\
         lamp_ON,on,lamp,1800,300\n\
         lamp_OFF,OFF,lamp,600,60\n",
    )
    .unwrap();
    let mut args = Vec::new();
    for (flag, bias) in [("night", 0.1), ("morning", 0.5), ("afternoon", 0.3), ("evening", 0.8)] {
        args.push(format!("--{flag}"));
        args.push(matrix(dir, &format!("{flag}.csv"), bias));
    }
    args.push("--activities".into());
    args.push(acts.display().to_string());
    args
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&mut bin()).status.code(), Some(2));
    assert_eq!(run(bin().arg("frobnicate")).status.code(), Some(2));
    assert_eq!(run(bin().args(["learn", "--input", "x.csv"])).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let mut cmd = bin();
    cmd.arg("gen-matrix").args(matrix_args(dir.path())).args(["--days", "0", "--out", "x.csv"]);
    assert_eq!(run(&mut cmd).status.code(), Some(2));
}

#[test]
fn validate_reports_bad_rows() {
    let dir = tempfile::tempdir().unwrap();
    let good = matrix(dir.path(), "good.csv", 0.4);
    let o = run(bin().args(["validate", "--matrix", &good]));
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "ok");

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "state,a,b\na,0.5,0.4\nb,0.5,0.5\n").unwrap();
    let o = run(bin().arg("validate").arg("--matrix").arg(&bad));
    assert_eq!(o.status.code(), Some(1));
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("row 0") && out.contains("row-sum"), "{out}");
}

#[test]
fn data_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let o = run(bin().arg("summarize").arg("--input").arg(&missing));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error:"));

    let unsorted = dir.path().join("unsorted.csv");
    fs::write(
        &unsorted,
        "timestamp,sensor,value\n1970-01-01T00:01:00Z,door,1\n1970-01-01T00:00:00Z,door,0\n",
    )
    .unwrap();
    let o = run(bin().arg("summarize").arg("--input").arg(&unsorted));
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn gen_matrix_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = matrix_args(dir.path());
    let mut outputs = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("out{i}.csv"));
        let o = run(bin()
            .arg("gen-matrix")
            .args(&args)
            .args(["--days", "3", "--seed", "11", "--start", "2024-03-01T06:30:00Z", "--out"])
            .arg(&out));
        assert!(o.status.success(), "{}", stderr(&o));
        outputs.push(fs::read_to_string(out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let mut lines = outputs[0].lines();
    assert_eq!(lines.next(), Some("timestamp,sensor,value"));
    let first = lines.next().unwrap();
    assert!(first.starts_with("2024-03-01T06:30:00Z,"), "{first}");
}

#[test]
fn omitted_seed_is_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let args = matrix_args(dir.path());
    let out = dir.path().join("a.csv");
    let o = run(bin().arg("gen-matrix").args(&args).args(["--days", "1", "--out"]).arg(&out));
    assert!(o.status.success());
    let err = stderr(&o);
    let seed: u64 = err
        .lines()
        .find_map(|l| l.strip_prefix("seed: "))
        .expect("seed line")
        .parse()
        .unwrap();

    let again = dir.path().join("b.csv");
    let o = run(bin()
        .arg("gen-matrix")
        .args(&args)
        .args(["--days", "1", "--seed", &seed.to_string(), "--out"])
        .arg(&again));
    assert!(o.status.success());
    assert!(!stderr(&o).contains("seed:"));
    assert_eq!(fs::read(out).unwrap(), fs::read(again).unwrap());
}

#[test]
fn unknown_activities_warn() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = matrix_args(dir.path());
    let acts = dir.path().join("activities.csv");
    let mut body = fs::read_to_string(&acts).unwrap();
    body.push_str("fridge_ON,ON,fridge,60,0\n");
    fs::write(&acts, body).unwrap();
    args.push("--days".into());
    args.push("1".into());
    let out = dir.path().join("o.csv");
    let o = run(bin().arg("gen-matrix").args(&args).args(["--seed", "1", "--out"]).arg(&out));
    assert!(o.status.success());
    assert!(stderr(&o).contains("fridge_ON"), "{}", stderr(&o));
}

#[test]
fn dataset_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let sample = dir.path().join("sample.csv");
    let o = run(bin()
        .arg("gen-matrix")
        .args(matrix_args(dir.path()))
        .args(["--days", "14", "--seed", "5", "--out"])
        .arg(&sample));
    assert!(o.status.success(), "{}", stderr(&o));

    let anomalies = dir.path().join("anomalies.csv");
    fs::write(
        &anomalies,
        "start,end,kind\n1970-01-02T00:00:00Z,1970-01-02T12:00:00Z,activity\n",
    )
    .unwrap();
    let synth = dir.path().join("synth.csv");
    let o = run(bin()
        .arg("gen-dataset")
        .arg("--input")
        .arg(&sample)
        .args(["--interval", "3", "--days", "4", "--seed", "6", "--anomalies"])
        .arg(&anomalies)
        .arg("--out")
        .arg(&synth));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(fs::read_to_string(&synth).unwrap().lines().count() > 1);

    let learned = dir.path().join("learned");
    let o = run(bin()
        .arg("learn")
        .arg("--input")
        .arg(&synth)
        .args(["--interval", "3", "--out-dir"])
        .arg(&learned));
    assert!(o.status.success(), "{}", stderr(&o));
    for p in 0..8 {
        let m = learned.join(format!("period_{p}.csv"));
        assert_eq!(run(bin().arg("validate").arg("--matrix").arg(&m)).status.code(), Some(0));
    }
    let durations = fs::read_to_string(learned.join("durations.csv")).unwrap();
    assert!(durations.starts_with("state,period,mean_seconds,sd_seconds,samples\n"));

    let o = run(bin().arg("learn").arg("--input").arg(&synth).args(["--interval", "5", "--out-dir"]).arg(&learned));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn summarize_lists_sensors() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.csv");
    fs::write(
        &log,
        "timestamp,sensor,value\n\
         1970-01-01T00:00:00Z,door,1\n\
         1970-01-01T00:00:30Z,door,0\n\
         1970-01-01T00:01:00Z,lamp,ON\n\
         1970-01-01T00:11:00Z,lamp,off\n",
    )
    .unwrap();
    let o = run(bin().arg("summarize").arg("--input").arg(&log));
    assert!(o.status.success(), "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    let mut lines = out.lines();
    assert!(lines.next().unwrap().starts_with("sensor,events,on_seconds"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("door,2,30,"), "{}", rows[0]);
    assert!(rows[1].starts_with("lamp,2,600,"), "{}", rows[1]);
}
