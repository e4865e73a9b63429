use std::io::Write;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_walkgroups")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn counts_excursions() {
    let o = run(&["count", "kreweras", "--from", "0,0", "--to", "0,0", "--n", "6"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "[1, 0, 0, 2, 0, 0, 16]");
    let o = run(&["--json", "count", "simple-walk", "--from", "0,0", "--to", "0,0", "--n", "4"]);
    assert_eq!(stdout(&o).trim(), r#"["1","0","2","0","10"]"#);
}

#[test]
fn exit_codes() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(f, r#"{{"d":2,"steps":[["1,0","1"],["-1,0","1"],["0,1","1"]]}}"#).unwrap();
    let o = run(&["analyze", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("violated"));

    assert_eq!(run(&["analyze", "no-such-model"]).status.code(), Some(1));

    let mut bad = tempfile::NamedTempFile::new().unwrap();
    write!(bad, "{{ not json").unwrap();
    assert_eq!(run(&["analyze", bad.path().to_str().unwrap()]).status.code(), Some(1));

    assert_eq!(run(&["--strict", "analyze", "kreweras"]).status.code(), Some(0));
}

#[test]
fn analyze_reports_the_group() {
    let o = run(&["--json", "analyze", "fig1-order10"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["group"]["order"]["finite"], 10, "{v}");
}

#[test]
fn census_summary_is_independent_of_jobs() {
    let a = run(&["--json", "--jobs", "1", "classify2d", "--no-elliptic"]);
    let b = run(&["--json", "--jobs", "4", "classify2d", "--no-elliptic"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&run(&["classify2d", "--no-elliptic"]));
    assert!(text.lines().last().unwrap().starts_with("79 classes, 23 finite"), "{text}");
}

#[test]
fn family_checks() {
    let o = run(&["verify-families", "--family", "4a", "--weights", "2,2,4,1"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS"));
    let o = run(&["verify-families", "--family", "b3-model1"]);
    assert!(o.status.success(), "{}", stdout(&o));
}

#[test]
fn elliptic_ratio() {
    let o = run(&["elliptic", "kreweras"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("r constant = 2/3"));
}
