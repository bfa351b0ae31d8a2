use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use uniform_fatou::gallery::example_3_2;
use uniform_fatou::{Measure, SequencePair, StepFunction, CellPartition, Rational, Term};
use uniform_fatou_cli::spec::SequenceSpecFile;

fn ufatou(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ufatou"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn column(report: &Value, key: &str) -> Vec<String> {
    report["per_n_rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r[key].as_str().unwrap().to_string())
        .collect()
}

fn write_spec(dir: &Path, name: &str, file: &SequenceSpecFile) -> String {
    let path = dir.join(name);
    fs::write(&path, file.to_json()).unwrap();
    path.display().to_string()
}

#[test]
fn gallery_3_4_gap_column() {
    let o = ufatou(&["gallery", "--example", "3.4", "--n", "1..8"]);
    assert_eq!(code(&o), 0);
    let want: Vec<String> = (1..=8)
        .map(|n| (-(Rational::frac(1, 2) - Rational::frac(1, 2 * n))).to_string())
        .collect();
    assert_eq!(column(&json(&o), "gap_inf"), want);
}

#[test]
fn gallery_3_1_l1_column() {
    let o = ufatou(&["gallery", "--example", "3.1", "--n", "1..4"]);
    assert_eq!(code(&o), 0);
    assert_eq!(column(&json(&o), "l1"), ["1/1", "1/2", "1/2", "1/4"]);
}

#[test]
fn gallery_3_2_single_row() {
    let o = ufatou(&["gallery", "--example", "3.2", "--n", "2..2"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert_eq!(column(&r, "tv"), ["1/2"]);
    assert_eq!(column(&r, "gap_inf"), ["0/1"]);
    assert_eq!(r["verdicts"]["condition_i"]["verdict"], "FAILS");
    assert_eq!(r["witnesses"]["condition_i"]["eps"], "1/1");
}

#[test]
fn report_has_the_four_sections() {
    let r = json(&ufatou(&["gallery", "--example", "3.3", "--n", "1..3"]));
    for key in ["meta", "per_n_rows", "verdicts", "witnesses"] {
        assert!(r.get(key).is_some(), "{key}");
    }
    assert_eq!(r["meta"]["n_range"], serde_json::json!([1, 3]));
    assert_eq!(r["verdicts"]["consistency"], "hypothesis_not_met");
}

#[test]
fn gallery_output_is_byte_identical() {
    let args = ["gallery", "--example", "3.4", "--n", "1..8"];
    assert_eq!(ufatou(&args).stdout, ufatou(&args).stdout);
    let md = ["gallery", "--example", "3.1", "--n", "1..16", "--format", "md"];
    assert_eq!(ufatou(&md).stdout, ufatou(&md).stdout);
}

#[test]
fn markdown_rendering() {
    let o = ufatou(&["gallery", "--example", "3.4", "--n", "2..3", "--format", "md"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("| 2 | -1/4 | 1/4 | 1/2 | 0/1 | {d2=0} |"), "{text}");
    assert!(text.contains("closed forms: all match"));
}

#[test]
fn custom_grids() {
    let o = ufatou(&["gallery", "--example", "3.3", "--n", "1..4", "--eps", "1/3,1/2", "--K", "3"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert_eq!(r["meta"]["eps_grid"], serde_json::json!(["1/3", "1/2"]));
    assert_eq!(r["meta"]["K_grid"], serde_json::json!(["3/1"]));
    assert_eq!(r["verdicts"]["condition_i"]["verdict"], "FAILS");
}

#[test]
fn usage_errors() {
    assert_eq!(code(&ufatou(&["gallery", "--example", "3.7"])), 64);
    assert_eq!(code(&ufatou(&["gallery", "--example", "3.1", "--n", "0..3"])), 64);
    assert_eq!(code(&ufatou(&["gallery", "--example", "3.1", "--eps", "-1"])), 64);
    assert_eq!(code(&ufatou(&["gallery", "--example", "3.1", "--eps", "0"])), 64);
    assert_eq!(code(&ufatou(&["frobnicate"])), 64);
    assert_eq!(code(&ufatou(&["--help"])), 0);
}

#[test]
fn unwritable_output() {
    let o = ufatou(&["gallery", "--example", "3.1", "--n", "1..2", "--out", "/nonexistent/dir/report.json"]);
    assert_eq!(code(&o), 74);
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let o = ufatou(&["gallery", "--example", "3.4", "--n", "1..2", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let r: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(column(&r, "gap_inf"), ["0/1", "-1/4"]);
}

fn constant_spec() -> SequenceSpecFile {
    let p = CellPartition::dyadic_level(2).unwrap();
    let f = StepFunction::new(p.clone(), [3, -1, 0, 2].map(Rational::integer).to_vec()).unwrap();
    let t = Term::new(Measure::base(&p), f);
    let terms = (1..=5).map(|n| (n, t.clone())).collect();
    SequenceSpecFile::from_sequence(&SequencePair::listed(terms, t).unwrap(), 5).unwrap()
}

#[test]
fn check_constant_sequence_is_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_spec(dir.path(), "c.json", &constant_spec());
    let o = ufatou(&["check", "--spec", &path]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o)["verdicts"]["consistency"], "consistent");
}

#[test]
fn check_example_3_2_at_level_4_misses_hypothesis() {
    let dir = tempfile::tempdir().unwrap();
    let terms = (1..=4).map(|n| (n, example_3_2(n).unwrap())).collect();
    let p = CellPartition::unit();
    let limit = Term::new(Measure::base(&p), StepFunction::constant(&p, Rational::integer(-1)));
    let seq = SequencePair::listed(terms, limit).unwrap();
    let file = SequenceSpecFile::from_sequence(&seq, 4).unwrap();
    assert_eq!(file.space, uniform_fatou_cli::spec::Space::DyadicUnitInterval { level: 4 });
    let path = write_spec(dir.path(), "e32.json", &file);
    let o = ufatou(&["check", "--spec", &path]);
    assert_eq!(code(&o), 3);
    assert_eq!(json(&o)["verdicts"]["consistency"], "hypothesis_not_met");
}

#[test]
fn check_undetermined_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let mut file = constant_spec();
    // term values drift away from the limit on the last term
    file.terms[4].values[0] = Rational::integer(1);
    let path = write_spec(dir.path(), "u.json", &file);
    assert_eq!(code(&ufatou(&["check", "--spec", &path])), 1);
}

#[test]
fn check_wrong_closed_form_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut file = constant_spec();
    file.analytic = Some(uniform_fatou::Analytic {
        gap_inf: Some(uniform_fatou::ClosedForm::constant(Rational::frac(-1, 2))),
        ..Default::default()
    });
    let path = write_spec(dir.path(), "w.json", &file);
    let o = ufatou(&["check", "--spec", &path]);
    assert_eq!(code(&o), 2);
    assert_eq!(json(&o)["mismatches"].as_array().unwrap().len(), 5);
}

#[test]
fn malformed_rational_is_a_data_error_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let text = constant_spec().to_json().replacen("\"1/4\"", "\"1/0\"", 1);
    let path = dir.path().join("bad.json");
    fs::write(&path, &text).unwrap();
    let o = ufatou(&["check", "--spec", path.to_str().unwrap()]);
    assert_eq!(code(&o), 65);
    let line = text.lines().position(|l| l.contains("1/0")).unwrap() + 1;
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains(&format!("line {line}")), "{err}");
}

#[test]
fn validation_errors_name_the_term() {
    let dir = tempfile::tempdir().unwrap();
    let mut file = constant_spec();
    file.terms[2].masses[1] = Rational::frac(-1, 4);
    let path = write_spec(dir.path(), "neg.json", &file);
    let o = ufatou(&["check", "--spec", &path]);
    assert_eq!(code(&o), 65);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("terms[2] (n = 3)"), "{err}");

    let mut file = constant_spec();
    file.terms[1].values.pop();
    let path = write_spec(dir.path(), "short.json", &file);
    assert_eq!(code(&ufatou(&["check", "--spec", &path])), 65);

    let mut file = constant_spec();
    file.terms.swap(0, 1);
    let path = write_spec(dir.path(), "order.json", &file);
    assert_eq!(code(&ufatou(&["check", "--spec", &path])), 65);
}

#[test]
fn missing_spec_is_io_error() {
    assert_eq!(code(&ufatou(&["check", "--spec", "/nonexistent/spec.json"])), 74);
}

#[test]
fn oracle_passes_and_is_deterministic() {
    let args = ["oracle", "--max-cells", "12", "--trials", "200", "--seed", "42"];
    let a = ufatou(&args);
    assert_eq!(code(&a), 0);
    let s = json(&a);
    assert_eq!(s["passed"], 200);
    assert_eq!(s["failed"], 0);
    assert_eq!(a.stdout, ufatou(&args).stdout);
}

#[test]
fn oracle_zero_trials_is_vacuous_pass() {
    let o = ufatou(&["oracle", "--trials", "0"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["passed"], 0);
}

#[test]
fn oracle_cell_cap() {
    assert_eq!(code(&ufatou(&["oracle", "--max-cells", "21"])), 64);
    assert_eq!(code(&ufatou(&["oracle", "--max-cells", "0"])), 64);
}

#[test]
fn corrupted_closed_form_is_caught() {
    let o = ufatou(&["oracle", "--max-cells", "6", "--trials", "5", "--seed", "1", "--corrupt"]);
    assert_eq!(code(&o), 2);
    let s = json(&o);
    let f = &s["first_failure"];
    assert_eq!(f["quantity"], "gap_inf");
    assert_eq!(f["trial"], 0);
    let inst = &f["instance"];
    let cells = inst["cells"].as_array().unwrap().len();
    for key in ["f", "m", "g", "v"] {
        assert_eq!(inst[key].as_array().unwrap().len(), cells);
    }
}
