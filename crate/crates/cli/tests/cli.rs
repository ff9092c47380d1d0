use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_acc-specgram");
const HEADER: &str = "R,trace,N,E_count,var_spectral,var_radial,ratio,err_raw,err_normalized,tail_mass";

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("ACC_SPECGRAM_THREADS").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Data rows of a summary CSV as optional floats, after checking the header.
fn summary(text: &str) -> Vec<Vec<Option<f64>>> {
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# acc-specgram "));
    assert_eq!(lines.next().unwrap(), HEADER);
    lines
        .map(|l| l.split(',').map(|f| if f.is_empty() { None } else { Some(f.parse::<f64>().unwrap()) }).collect())
        .collect()
}

fn col(name: &str) -> usize {
    HEADER.split(',').position(|c| c == name).unwrap()
}

fn value_after(text: &str, label: &str) -> f64 {
    let line = text.lines().find(|l| l.starts_with(label)).unwrap();
    line[label.len()..].trim().parse().unwrap()
}

#[test]
fn lens_examples() {
    let o = run(&["lens", "--dim", "2", "--r", "1", "--R", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let want = std::f64::consts::PI / 3.0 + 3f64.sqrt() / 2.0;
    assert!((value_after(&text, "series") - want).abs() < 1e-8);
    assert!((value_after(&text, "exact") - want).abs() < 1e-8);
    assert!((want - 1.91322).abs() < 1e-5);

    let text = stdout(&run(&["lens", "--dim", "1", "--r", "0.7", "--R", "1"]));
    assert!((value_after(&text, "series") - 0.7).abs() < 1e-12);
    assert!((value_after(&text, "exact") - 0.7).abs() < 1e-12);

    let text = stdout(&run(&["lens", "--dim", "3", "--r", "2", "--R", "1"]));
    let ball = 4.0 * std::f64::consts::PI / 3.0;
    assert!((value_after(&text, "series") - ball).abs() < 1e-12);
    assert!((value_after(&text, "exact") - ball).abs() < 1e-12);
}

#[test]
fn lens_rejects_bad_numbers() {
    for args in [["--dim", "0", "--r", "1", "--R", "1"], ["--dim", "2", "--r", "-1", "--R", "1"], ["--dim", "2", "--r", "1", "--R", "nan"]] {
        let mut full = vec!["lens"];
        full.extend(args);
        assert_eq!(run(&full).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn missing_kernel() {
    let o = run(&["spectrogram", "--region", "interval:-1,1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("kernel: required"));
}

#[test]
fn overlapping_union() {
    let o = run(&["variance", "--kernel", "sine", "--region", "union:-1,1/1,1.5", "--R", "1,2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("union: balls overlap"));
}

#[test]
fn config_errors_name_the_field() {
    for (args, field) in [
        (vec!["variance", "--kernel", "sine", "--R", "4,2"], "R:"),
        (vec!["variance", "--kernel", "sine", "--region", "box:0,1,0,1"], "region:"),
        (vec!["variance", "--kernel", "blob"], "kernel:"),
        (vec!["spectrogram", "--kernel", "sine", "--margin=-1"], "margin:"),
        (vec!["check", "--delta", "1.5"], "delta:"),
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(stderr(&o).contains(field), "{args:?}: {}", stderr(&o));
    }
    let o = Command::new(BIN).args(["lens", "--dim", "1", "--r", "1", "--R", "1"]).env("ACC_SPECGRAM_THREADS", "many").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ACC_SPECGRAM_THREADS"));
}

#[test]
fn spectrogram_csv_and_fields() {
    let dir = tempfile::tempdir().unwrap();
    let fields = dir.path().join("fields.csv");
    let o = run(&[
        "spectrogram", "--kernel", "sine", "--region", "interval:-1,1", "--R", "2,4,8", "--n", "300", "--margin", "10", "--fields",
        fields.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = summary(&stdout(&o));
    assert_eq!(rows.len(), 3);
    let err = col("err_normalized");
    assert!(rows.windows(2).all(|w| w[1][err].unwrap() < w[0][err].unwrap()));
    for row in &rows {
        assert!(row[col("var_radial")].is_none());
        assert!(row.iter().flatten().all(|v| v.is_finite()));
        let trace = row[col("trace")].unwrap();
        assert_eq!(row[col("N")].unwrap() as usize, trace.floor() as usize + 1);
    }

    let text = std::fs::read_to_string(&fields).unwrap();
    let mut lines = text.lines().skip(1);
    assert_eq!(lines.next().unwrap(), "R,x0,rho,target");
    let mut count = 0;
    for l in lines {
        let v: Vec<f64> = l.split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(v.len(), 4);
        assert!(v.iter().all(|x| x.is_finite()));
        count += 1;
    }
    // 300 cells on the interval plus ceil(10/h) per side, h = 2R/300
    let expected: usize = [2.0f64, 4.0, 8.0].iter().map(|r| 300 + 2 * (10.0 * 150.0 / r).ceil() as usize).sum();
    assert_eq!(count, expected);
}

#[test]
fn spectrogram_json_document() {
    let o = run(&["spectrogram", "--kernel", "sine", "--region", "interval:-1,1", "--R", "2,4", "--n", "100", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["summary"].as_array().unwrap().len(), 2);
    assert!(!doc["fields"].as_array().unwrap().is_empty());
    assert_eq!(doc["command"], "spectrogram");
    assert_eq!(doc["config"]["R"], serde_json::json!([2.0, 4.0]));

    let csv = stdout(&run(&["spectrogram", "--kernel", "sine", "--region", "interval:-1,1", "--R", "2,4", "--n", "100"]));
    let rows = summary(&csv);
    for (row, js) in rows.iter().zip(doc["summary"].as_array().unwrap()) {
        for name in ["err_raw", "tail_mass", "trace"] {
            let (a, b) = (row[col(name)].unwrap(), js[name].as_f64().unwrap());
            assert!((a - b).abs() <= 1e-15 * a.abs(), "{name}: {a} vs {b}");
        }
    }
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let paths = [dir.path().join("a.csv"), dir.path().join("b.csv")];
    for p in &paths {
        let o = run(&["spectrogram", "--kernel", "ginibre", "--region", "cube:0,1", "--R", "1,2", "-o", p.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let a = std::fs::read(&paths[0]).unwrap();
    let b = std::fs::read(&paths[1]).unwrap();
    assert_eq!(a, b);
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["spectrogram", "--kernel", "sine", "--region", "interval:-1,1", "--R", "2,4", "--n", "120"];
    let one = Command::new(BIN).args(args).env("ACC_SPECGRAM_THREADS", "1").output().unwrap();
    let auto = Command::new(BIN).args(args).env("ACC_SPECGRAM_THREADS", "0").output().unwrap();
    assert!(one.status.success() && auto.status.success());
    assert_eq!(one.stdout, auto.stdout);
}

#[test]
fn check_default_passes() {
    let o = run(&["check"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 10);
    assert!(!text.contains("FAIL"));
}

#[test]
fn check_reports_c_delta() {
    let o = run(&["check", "--delta", "0.5"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l == "C_delta = 2"));
}

#[test]
fn truncated_series_fails_check() {
    let o = run(&["check", "--debug-truncate-series", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).lines().any(|l| l.starts_with("FAIL lens_series_vs_exact")));
    assert!(stderr(&o).contains("lens_series_vs_exact"));
}

#[test]
fn check_ginibre_box() {
    let o = run(&["check", "--kernel", "ginibre", "--region", "box:0,2,0,1.5", "--spacing", "0.1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn variance_fit_paley_wiener() {
    let o = run(&["variance", "--kernel", "paley-wiener", "--dim", "1", "--R", "10:200:log20", "--no-spectral", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let fit = &doc["fit"];
    let slope = fit["slope"].as_f64().unwrap();
    assert!((fit["asymptotic_constant"].as_f64().unwrap() - 0.101321).abs() < 1e-6);
    assert!((slope / 0.1013211836 - 1.0).abs() < 0.10);
    assert_eq!(doc["summary"].as_array().unwrap().len(), 20);
}

#[test]
fn variance_fit_range_is_a_warning() {
    let o = run(&["variance", "--kernel", "paley-wiener", "--dim", "2", "--R", "10,20", "--no-spectral", "--format", "json"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(doc.get("fit").is_none());
    assert!(doc["warnings"].as_array().unwrap().iter().any(|w| w.as_str().unwrap().starts_with("fit:")));
}

#[test]
fn variance_ginibre_cross_route() {
    let o = run(&["variance", "--kernel", "ginibre", "--cdim", "1", "--R", "1,2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = summary(&stdout(&o));
    assert_eq!(rows.len(), 2);
    for row in rows {
        let s = row[col("var_spectral")].unwrap();
        let r = row[col("var_radial")].unwrap();
        assert!((s - r).abs() / r <= 0.02, "{s} vs {r}");
        assert!(row[col("err_raw")].is_none() && row[col("N")].is_none());
    }
}

#[test]
fn variance_union_upper_bound() {
    let o = run(&["variance", "--kernel", "sine", "--region", "union:-2,1/2,0.5", "--R", "5,10,20,40", "--no-spectral", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let upper: Vec<f64> = doc["upper_subadditive"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(upper.len(), 4);
    let e: Vec<f64> = doc["summary"].as_array().unwrap().iter().map(|r| r["E_count"].as_f64().unwrap()).collect();
    assert!(upper.iter().zip(&e).map(|(u, e)| u / e).collect::<Vec<_>>().windows(2).all(|w| w[1] < w[0]));
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

#[test]
fn schema_matches_golden() {
    let o = run(&["--schema"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), golden("schema.txt"));
    assert!(stdout(&o).contains("summary columns"));
}

#[test]
fn variance_matches_golden() {
    let o = run(&["variance", "--kernel", "sine", "--region", "ball:1", "--R", "1,2,4", "--no-spectral"]);
    assert!(o.status.success());
    let want = golden("variance_sine_radial.csv");
    let got = stdout(&o);
    assert_eq!(got.lines().nth(1), want.lines().nth(1));
    let (a, b) = (summary(&got), summary(&want));
    assert_eq!(a.len(), b.len());
    for (ra, rb) in a.iter().zip(&b) {
        for (x, y) in ra.iter().zip(rb) {
            match (x, y) {
                (Some(x), Some(y)) => assert!((x - y).abs() <= 1e-12 * y.abs(), "{x} vs {y}"),
                (None, None) => {}
                _ => panic!("field presence differs"),
            }
        }
    }
}

#[test]
fn no_command_is_usage_error() {
    assert_eq!(run(&[]).status.code(), Some(2));
}
