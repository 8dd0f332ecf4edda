//! Golden-file tests for every subcommand. Regenerate with
//! `UPDATE_GOLDEN=1 cargo test -p vagueness-cli --test cli_golden`.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn ex(name: &str) -> String {
    root().join("examples").join(name).display().to_string()
}

struct Case {
    name: &'static str,
    args: Vec<String>,
    code: i32,
    /// Definition in the report grammar, `None` for non-JSON output.
    grammar: Option<&'static str>,
}

fn case(name: &'static str, args: &[&str], code: i32, grammar: Option<&'static str>) -> Case {
    let mut v = vec!["vagueness".to_string()];
    for a in args {
        v.push(match a.strip_prefix('@') {
            Some(file) => ex(file),
            None => a.to_string(),
        });
    }
    Case {
        name,
        args: v,
        code,
        grammar,
    }
}

fn cases() -> Vec<Case> {
    let tall = "@tall.scenario.json";
    vec![
        case("thresholds", &["thresholds", "--scenario", tall], 0, Some("thresholds_report")),
        case("thresholds_table", &["thresholds", "--scenario", tall, "--format", "table"], 0, None),
        case("classify_probe", &["classify", "--scenario", tall, "--systems", "@probe_1.8.csv"], 0, Some("classify_report")),
        case("classify_table", &["classify", "--scenario", tall, "--format", "table"], 0, None),
        case("faithfulness", &["faithfulness", "--scenario", tall], 0, Some("faithfulness_report")),
        case("sharpness", &["sharpness", "--scenario", tall], 0, Some("sharpness_report")),
        case("pan_check_iit", &["pan-check", "--scenario", "@iit.scenario.json"], 0, Some("pan_check_report")),
        case("thresholds_iit", &["thresholds", "--scenario", "@iit.scenario.json"], 0, Some("thresholds_report")),
        case("update", &["update", "--scenario", tall, "--systems", "@updates.csv"], 0, Some("update_report")),
        case("update_violation", &["update", "--scenario", tall, "--systems", "@bad_borderline.csv"], 3, Some("update_report")),
        case("simulate", &["simulate", "--scenario", tall], 0, None),
        case("simulate_seed7", &["simulate", "--scenario", tall, "--seed", "7", "--steps", "5"], 0, None),
        case(
            "compare",
            &["compare", "--scenario", tall, "--against", "@tall_b.scenario.json", "--grid-points", "21"],
            0,
            Some("compare_report"),
        ),
        case("rescale", &["rescale", "--scenario", tall], 0, Some("rescale_report")),
        case("binarize", &["binarize", "--scenario", tall], 0, Some("binarize_report")),
        case("binarize_table", &["binarize", "--scenario", tall, "--format", "table"], 0, None),
    ]
}

fn run(args: &[String]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = vagueness_cli::run_with(args, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn golden_reports() {
    let dir = root().join("tests").join("golden");
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let mut failures = Vec::new();
    for c in cases() {
        let (code, out, err) = run(&c.args);
        assert_eq!(code, c.code, "{}: exit code; stderr: {err}", c.name);
        let (again, out2, _) = run(&c.args);
        assert_eq!((again, &out2), (code, &out), "{}: not stable across runs", c.name);
        let path = dir.join(format!("{}.out", c.name));
        if update {
            std::fs::create_dir_all(&dir).unwrap();
            std::fs::write(&path, &out).unwrap();
            continue;
        }
        let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        if want != out {
            failures.push(c.name);
        }
    }
    assert!(failures.is_empty(), "golden mismatch: {failures:?}");
}

// Minimal checker for the subset of JSON Schema the grammar uses: type,
// required, properties, items, enum, $ref.
fn check(schema: &Value, defs: &Value, v: &Value, at: &str) -> Result<(), String> {
    if let Some(types) = schema.get("type") {
        let allowed: Vec<&str> = match types {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
            _ => vec![],
        };
        let actual = match v {
            Value::Null => "null",
            Value::Bool(_) => "boolean",
            Value::Number(n) if n.is_u64() || n.is_i64() => "integer",
            Value::Number(_) => "number",
            Value::String(_) => "string",
            Value::Array(_) => "array",
            Value::Object(_) => "object",
        };
        let ok = allowed.contains(&actual) || (actual == "integer" && allowed.contains(&"number"));
        if !ok {
            return Err(format!("{at}: {actual} not in {allowed:?}"));
        }
        if v.is_null() {
            return Ok(());
        }
    }
    if let Some(r) = schema.get("$ref").and_then(Value::as_str) {
        let name = r.trim_start_matches("#/$defs/");
        check(&defs[name], defs, v, at)?;
    }
    if let Some(Value::Array(options)) = schema.get("enum") {
        if !options.contains(v) {
            return Err(format!("{at}: {v} not in enum"));
        }
    }
    if let Value::String(s) = v {
        // extended reals
        if schema.get("type") == Some(&serde_json::json!(["number", "string"])) && s != "inf" && s != "-inf" {
            return Err(format!("{at}: bad extended real {s}"));
        }
    }
    if let Some(Value::Array(req)) = schema.get("required") {
        for key in req.iter().filter_map(Value::as_str) {
            if v.get(key).is_none() {
                return Err(format!("{at}: missing `{key}`"));
            }
        }
    }
    if let (Some(Value::Object(props)), Value::Object(obj)) = (schema.get("properties"), v) {
        for (k, s) in props {
            if let Some(child) = obj.get(k) {
                check(s, defs, child, &format!("{at}.{k}"))?;
            }
        }
    }
    if let (Some(items), Value::Array(arr)) = (schema.get("items"), v) {
        for (i, child) in arr.iter().enumerate() {
            check(items, defs, child, &format!("{at}[{i}]"))?;
        }
    }
    Ok(())
}

fn grammar() -> Value {
    let text = std::fs::read_to_string(root().join("schema/reports.schema.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn json_reports_match_grammar() {
    let g = grammar();
    let defs = &g["$defs"];
    for c in cases() {
        let Some(def) = c.grammar else { continue };
        let (_, out, _) = run(&c.args);
        let v: Value = serde_json::from_str(&out).unwrap();
        check(&defs[def], defs, &v, c.name).unwrap();
    }
}

#[test]
fn simulate_lines_match_grammar() {
    let g = grammar();
    let defs = &g["$defs"];
    let (_, out, _) = run(&cases().into_iter().find(|c| c.name == "simulate").unwrap().args);
    let lines: Vec<Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.first().unwrap()["type"], "header");
    assert_eq!(lines.last().unwrap()["type"], "summary");
    for (i, line) in lines.iter().enumerate() {
        check(&defs["simulate_line"], defs, line, &format!("line {i}")).unwrap();
        if line["type"] == "event" {
            check(&defs["trace_event"], defs, line, &format!("line {i}")).unwrap();
        }
    }
}

fn tmp_scenario(dir: &Path, body: &str) -> String {
    let p = dir.join("s.json");
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

#[test]
fn validation_errors_exit_2_without_report() {
    let dir = tempfile::tempdir().unwrap();
    let tall = std::fs::read_to_string(ex("tall.scenario.json")).unwrap();
    let bad_type = tmp_scenario(dir.path(), &tall.replace(r#""features": [1.9]"#, r#""features": ["a"]"#));
    let (code, out, err) = run(&["vagueness".into(), "thresholds".into(), "--scenario".into(), bad_type]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("error[parse_error]") && err.contains("$.exemplars.clear[0].features[0]"), "{err}");

    let unknown = tmp_scenario(dir.path(), &tall.replace(r#""observer": "A1""#, r#""observer": "A1", "x": 1"#));
    let (code, _, err) = run(&["vagueness".into(), "thresholds".into(), "--scenario".into(), unknown]);
    assert_eq!(code, 2);
    assert!(err.contains("error[unknown_field]") && err.contains("$.x"), "{err}");

    let csv = dir.path().join("w.csv");
    std::fs::write(&csv, "id,weight_kg\np9,70\n").unwrap();
    let (code, _, err) = run(&[
        "vagueness".into(),
        "classify".into(),
        "--scenario".into(),
        ex("tall.scenario.json"),
        "--systems".into(),
        csv.display().to_string(),
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("error[header_mismatch]"), "{err}");

    let (code, _, _) = run(&["vagueness".into(), "frobnicate".into()]);
    assert_eq!(code, 2);
}

#[test]
fn unfaithful_scenario_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let tall = std::fs::read_to_string(ex("tall.scenario.json")).unwrap();
    let s = tmp_scenario(dir.path(), &tall.replace(r#""features": [1.8] }"#, r#""features": [1.95] }"#));
    let (code, out, _) = run(&["vagueness".into(), "faithfulness".into(), "--scenario".into(), s.clone()]);
    assert_eq!(code, 3);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["is_faithful"], false);
    assert_eq!(v["violations"][0]["condition"], "borderline_outside_open_interval");
    let (code, out, err) = run(&["vagueness".into(), "thresholds".into(), "--scenario".into(), s]);
    assert_eq!(code, 3);
    assert!(out.is_empty());
    assert!(err.contains("error[faithfulness_violation]"), "{err}");
}

#[test]
fn out_flag_writes_whole_file_only_on_success() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.json");
    let args = |scenario: String| {
        vec![
            "vagueness".to_string(),
            "thresholds".into(),
            "--scenario".into(),
            scenario,
            "--out".into(),
            target.display().to_string(),
        ]
    };
    let (code, out, _) = run(&args(ex("tall.scenario.json")));
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let written = std::fs::read_to_string(&target).unwrap();
    assert!(written.starts_with("{\n  \"eta0\": 1.9,\n  \"gamma0\": 1.6,"));

    std::fs::remove_file(&target).unwrap();
    let (code, _, _) = run(&args(ex("missing.json")));
    assert_eq!(code, 2);
    assert!(!target.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_vagueness");
    let status = |args: &[String]| Command::new(bin).args(args).output().unwrap();
    let ok = status(&["classify".into(), "--scenario".into(), ex("tall.scenario.json"), "--systems".into(), ex("probe_1.8.csv")]);
    assert_eq!(ok.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["determinations"][0]["verdict"], "borderline");
    let bad = status(&["update".into(), "--scenario".into(), ex("tall.scenario.json"), "--systems".into(), ex("bad_borderline.csv")]);
    assert_eq!(bad.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&bad.stdout).unwrap();
    assert_eq!(v["events"][0]["event"]["kind"], "faithfulness_violation");
    assert_eq!(status(&["--format".into(), "xml".into(), "thresholds".into()]).status.code(), Some(2));
}
