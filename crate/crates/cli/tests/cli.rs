use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nqdelta"))
}

fn run_file(spec: &Value, args: &[&str]) -> Output {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(f, "{spec}").unwrap();
    let path = f.path().to_str().unwrap().to_string();
    let mut cmd = bin();
    cmd.args(args).args(["--spec", &path]);
    cmd.output().unwrap()
}

fn run_stdin(text: &str, args: &[&str]) -> Output {
    let mut child = bin()
        .args(args)
        .args(["--spec", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(text.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad report ({e}): {}\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn worked_example() -> Value {
    json!({
        "weights": {"kind": "geometric", "ratio": "3", "scale": "1"},
        "matrix": {"kind": "unit-column", "index": 1},
        "domain": "linf",
        "codomain": "linf"
    })
}

#[test]
fn norm_of_constant_sequence() {
    let spec = json!({
        "weights": {"kind": "constant", "value": "1"},
        "sequence": {"kind": "constant", "value": "1"}
    });
    let out = run_file(&spec, &["norm", "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["estimate"], "1");
    assert_eq!(r["outcome"], "Holds");
    assert_eq!(r["mode"], "exact");
    assert!(r.get("generated_at").is_none());
}

#[test]
fn classify_worked_example_is_inconclusive() {
    let out = run_file(&worked_example(), &["classify-compact", "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(&out);
    assert_eq!(r["outcome"], "Inconclusive");
    assert_eq!(r["details"]["compactness"], "inconclusive");
    assert_eq!(r["details"]["limit"], "2");
    let ids: Vec<&str> = r["discrepancies"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["id"].as_str().unwrap())
        .collect();
    assert!(ids.contains(&"mnc-worked-example"), "{ids:?}");
    assert!(ids.contains(&"co1i-worked-example"), "{ids:?}");
    let published: Vec<&str> = r["discrepancies"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["published"].as_str().unwrap())
        .collect();
    assert!(published.iter().any(|p| p.contains("7/6")));
    assert!(published.iter().any(|p| p.contains("< 2")));
}

#[test]
fn class_check_worked_example_holds() {
    let out = run_file(&worked_example(), &["class-check", "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["estimate"], "2");
    let conds: Vec<&str> = r["details"]["conditions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["condition"].as_str().unwrap())
        .collect();
    assert_eq!(conds, ["Co1i", "Co1ii"]);
}

#[test]
fn flags_override_the_spec() {
    let out = run_file(
        &worked_example(),
        &["class-check", "--codomain", "c", "--no-timestamp"],
    );
    assert_eq!(
        out.status.code(),
        Some(6),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("unsupported class"));

    let spec = json!({
        "weights": {"kind": "constant", "value": "1"},
        "sequence": {"kind": "unit", "index": 1}
    });
    let out = run_file(
        &spec,
        &[
            "dual-norm",
            "--float",
            "--variant",
            "printed",
            "--nmax",
            "64",
            "--no-timestamp",
        ],
    );
    let r = report(&out);
    assert_eq!(r["mode"], "float");
    assert_eq!(r["policy"]["n_max"], 64);
    assert_eq!(r["estimate"], 2.0);
    assert_eq!(r["spec"]["variant"], "printed");
}

#[test]
fn invert_zero_diagonal_is_an_input_error() {
    let spec = json!({
        "weights": {"kind": "constant", "value": "1"},
        "matrix": {"kind": "explicit", "rows": [["1"], ["1", "0"]], "tail": "zeros"},
        "n": 4
    });
    let out = run_file(&spec, &["invert"]);
    assert_eq!(out.status.code(), Some(7));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("singular"));
}

#[test]
fn invert_delta_minus() {
    let spec = json!({
        "weights": {"kind": "constant", "value": "1"},
        "matrix": {"kind": "delta-minus"},
        "n": 2
    });
    let r = report(&run_file(&spec, &["invert", "--no-timestamp"]));
    assert_eq!(
        r["details"]["inverse"],
        json!([["-1"], ["-1", "-1"], ["-1", "-1", "-1"]])
    );
}

#[test]
fn input_errors_have_distinct_codes() {
    let cases: [(&str, i32, &str); 4] = [
        ("{\"weights\":", 3, "malformed spec JSON"),
        (
            r#"{"weights":{"kind":"explicit","values":["1","-1"],"tail":"repeat-last"},"sequence":{"kind":"constant","value":"1"}}"#,
            4,
            "invalid weights",
        ),
        (
            r#"{"weights":{"kind":"constant","value":"1"}}"#,
            5,
            "`sequence` is required",
        ),
        (
            r#"{"weights":{"kind":"constant","value":"1"},"sequence":{"kind":"constant","value":"1"},"bogus":1}"#,
            3,
            "unknown field",
        ),
    ];
    for (text, code, msg) in cases {
        let out = run_stdin(text, &["norm"]);
        assert_eq!(out.status.code(), Some(code), "{text}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(msg), "{err}");
    }
    let out = bin()
        .args(["norm", "--spec", "/nonexistent/spec.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read spec"));
}

#[test]
fn reports_are_deterministic() {
    let args = ["mnc", "--no-timestamp"];
    let a = run_file(&worked_example(), &args);
    let b = run_file(&worked_example(), &args);
    assert_eq!(a.stdout, b.stdout);
    let with_time = report(&run_file(&worked_example(), &["mnc"]));
    assert!(with_time["generated_at"].as_u64().is_some());
}

#[test]
fn echoed_spec_reproduces_the_report() {
    let spec = json!({
        "weights": {"kind": "power", "exponent": 1},
        "sequence": {"kind": "explicit", "values": ["1", "-1/2", "3"], "tail": "zeros"},
        "policy": {"n_max": 128},
        "space": {"base": "c0"}
    });
    let first = run_file(
        &spec,
        &["beta-dual", "--variant", "printed", "--no-timestamp"],
    );
    let r = report(&first);
    let echoed = r["spec"].clone();
    assert_eq!(echoed["variant"], "printed");
    let second = run_file(&echoed, &["beta-dual", "--no-timestamp"]);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn csv_and_text_formats() {
    let spec = json!({
        "weights": {"kind": "constant", "value": "1"},
        "sequence": {"kind": "constant", "value": "1"}
    });
    let out = run_file(&spec, &["norm", "--format", "csv"]);
    assert_eq!(
        String::from_utf8_lossy(&out.stdout),
        "index,value\n8,1\n16,1\n32,1\n"
    );
    let out = run_file(&spec, &["norm", "--format", "text"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(
        text.lines()
            .any(|l| l.starts_with("outcome") && l.ends_with("Holds")),
        "{text}"
    );
}

#[test]
fn every_command_runs() {
    let w = json!({"kind": "geometric", "ratio": "2", "scale": "1"});
    let cases = [
        (
            "transform",
            json!({"weights": w, "sequence": {"kind": "unit", "index": 0}, "n": 4}),
        ),
        ("basis", json!({"weights": w, "index": 2, "n": 5})),
        (
            "member",
            json!({"weights": {"kind": "constant", "value": "1"}, "sequence": {"kind": "unit", "index": 3}, "space": {"base": "c0"}}),
        ),
        (
            "beta-dual",
            json!({"weights": w, "sequence": {"kind": "unit", "index": 1}, "space": {"base": "c"}}),
        ),
        (
            "dual-norm",
            json!({"weights": w, "sequence": {"kind": "unit", "index": 1}}),
        ),
        (
            "class-check",
            json!({"weights": w, "matrix": {"kind": "zero"}, "domain": "c", "codomain": "c"}),
        ),
        (
            "mnc",
            json!({"weights": w, "matrix": {"kind": "zero"}, "domain": "c0", "codomain": "c0"}),
        ),
        (
            "classify-compact",
            json!({"weights": w, "matrix": {"kind": "zero"}, "domain": "c", "codomain": "c0"}),
        ),
        (
            "invert",
            json!({"weights": w, "matrix": {"kind": "composed"}, "n": 3}),
        ),
    ];
    for (cmd, spec) in &cases {
        let out = run_file(spec, &[cmd, "--no-timestamp"]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{cmd}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert_eq!(report(&out)["command"], *cmd);
    }
    let basis = report(&run_file(&cases[1].1, &["basis", "--no-timestamp"]));
    assert_eq!(
        basis["details"]["tau"],
        json!(["0", "0", "1", "0", "0", "0"])
    );
}
