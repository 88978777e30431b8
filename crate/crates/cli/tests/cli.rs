use std::path::Path;
use std::process::{Command, Output};

fn cobeam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cobeam"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn records(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|x| x.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn validate_passes_on_defaults() {
    let o = cobeam(&["validate"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn theory_table_zero_mean_row() {
    let o = cobeam(&[
        "theory-table",
        "--set",
        "theory.k_values=[0]",
        "--set",
        "theory.c_values=[2]",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = records(&stdout(&o));
    assert_eq!(rows.len(), 1);
    let closed: f64 = rows[0][column(&h, "closed_form")].parse().unwrap();
    let residual: f64 = rows[0][column(&h, "residual")].parse().unwrap();
    assert!((closed - 2.0).abs() < 1e-12);
    assert!(residual < 1e-6);
}

#[test]
fn smallcell_sweep_has_a_row_per_radius_and_precoder() {
    let o = cobeam(&["smallcell-sweep", "--trials", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = records(&stdout(&o));
    assert_eq!(h.last().unwrap(), "runtime_s");
    assert_eq!(rows.len(), 18);
    for p in ["zfp", "zfp_d", "mpdr"] {
        let radii: Vec<&str> = rows
            .iter()
            .filter(|r| r[column(&h, "precoder")] == p)
            .map(|r| r[column(&h, "sweep_value")].as_str())
            .collect();
        assert_eq!(radii, ["15", "20", "25", "30", "35", "40"]);
    }
    assert!(rows.iter().all(|r| r[column(&h, "error")].is_empty()));
}

#[test]
fn same_seed_gives_identical_csv() {
    let args = ["precoder-compare", "--trials", "4", "--seed", "9", "--no-runtime-col"];
    let a = cobeam(&args);
    let b = cobeam(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = cobeam(&["precoder-compare", "--trials", "4", "--seed", "10", "--no-runtime-col"]);
    assert_ne!(a.stdout, c.stdout);
    let (h, _) = records(&stdout(&a));
    assert!(!h.contains(&"runtime_s".to_string()));
}

#[test]
fn config_echo_reruns_the_same_point() {
    let dir = tempfile::tempdir().unwrap();
    let o = cobeam(&[
        "cellfree-sweep",
        "--trials",
        "5",
        "--no-runtime-col",
        "--set",
        "sweep={\"param\":\"nu\",\"values\":[4,6]}",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = records(&stdout(&o));
    let row = &rows[1];
    let path = dir.path().join("point.json");
    std::fs::write(&path, &row[column(&h, "config")]).unwrap();
    let again = cobeam(&["cellfree-sweep", "--config", path.to_str().unwrap(), "--no-runtime-col"]);
    assert_eq!(again.status.code(), Some(0));
    let (h2, rows2) = records(&stdout(&again));
    assert_eq!(rows2.len(), 1);
    for name in ["avg_se_sim", "avg_se_theory", "avg_vse_sim", "users", "config"] {
        assert_eq!(rows2[0][column(&h2, name)], row[column(&h, name)], "{name}");
    }
}

#[test]
fn infeasible_cells_are_reported_and_the_run_continues() {
    let o = cobeam(&[
        "smallcell-sweep",
        "--trials",
        "2",
        "--set",
        "aa_size=2",
        "--set",
        "precoders=[\"zfp\"]",
        "--set",
        "sweep={\"param\":\"nu\",\"values\":[2,9]}",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = records(&stdout(&o));
    assert_eq!(rows.len(), 2);
    assert!(rows[0][column(&h, "error")].is_empty());
    assert!(rows[1][column(&h, "error")].contains("constraints"), "{:?}", rows[1]);
    assert!(rows[1][column(&h, "avg_se_sim")].is_empty());
}

#[test]
fn config_errors_exit_with_status_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        "{\n  \"n_trials\": 10,\n  \"link\": {\"freq_ghz\": \"high\"}\n}\n",
    )
    .unwrap();
    let o = cobeam(&["ber", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains(&format!("{}:3:", path.display())), "{err}");

    assert_eq!(cobeam(&["ber", "--set", "scenario.unknown=1"]).status.code(), Some(1));
    assert_eq!(cobeam(&["ber", "--trials", "0"]).status.code(), Some(1));
    assert_eq!(
        cobeam(&["ber", "--config", "/nonexistent/cfg.json"]).status.code(),
        Some(1)
    );
    assert_eq!(cobeam(&["no-such-subcommand"]).status.code(), Some(1));
}

#[test]
fn unwritable_output_is_a_runtime_failure() {
    let o = cobeam(&["theory-table", "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_goes_to_the_requested_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ber.csv");
    let o = cobeam(&[
        "ber",
        "--trials",
        "3",
        "--out",
        path.to_str().unwrap(),
        "--set",
        "sweep={\"param\":\"k_db\",\"values\":[0]}",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(Path::new(&path)).unwrap();
    let (h, rows) = records(&text);
    let ber: f64 = rows[0][column(&h, "ber")].parse().unwrap();
    assert!((0.0..=1.0).contains(&ber));
}

#[test]
fn compare_arch_matches_user_counts() {
    let o = cobeam(&[
        "compare-arch",
        "--trials",
        "2",
        "--no-runtime-col",
        "--set",
        "sweep={\"param\":\"k_db\",\"values\":[5]}",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = records(&stdout(&o));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][column(&h, "architecture")], "small_cell");
    assert_eq!(rows[1][column(&h, "architecture")], "cell_free");
    assert_eq!(rows[0][column(&h, "users")], rows[1][column(&h, "users")]);
}
