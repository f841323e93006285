use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hyperlap(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperlap"))
        .args(args)
        .current_dir(dir)
        .env_remove("HYPERLAP_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn constants_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = hyperlap(
        &["constants", "--gamma", "1", "--dim", "2", "--json"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let classical = v["classical"].as_f64().unwrap();
    let theorem = v["theorem"].as_f64().unwrap();
    assert!((classical - 0.039_788_735_772_973_836).abs() < 1e-15);
    assert!((theorem - 0.057_932_399_285_449_9).abs() < 1e-14);
    let text = String::from_utf8(o.stdout).unwrap();
    let at: Vec<usize> = [
        "\"gamma\"",
        "\"dim\"",
        "\"classical\"",
        "\"theorem\"",
        "\"r11\"",
    ]
    .iter()
    .map(|k| text.find(k).unwrap())
    .collect();
    assert!(at.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn ratio_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let o = hyperlap(
        &[
            "ratio", "--dmin", "2", "--dmax", "20", "--csv", "fig1.csv", "--svg", "fig1.svg",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("fig1.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("d,ratio"));
    let rows: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(rows.len(), 19);
    assert!(rows.iter().all(|&r| r > 1.0));
    assert!(!csv.contains('\r'));

    let svg = fs::read_to_string(dir.path().join("fig1.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let root = doc.root_element();
    assert_eq!(root.attribute("width"), Some("960"));
    assert_eq!(root.attribute("height"), Some("640"));
    let polylines = doc
        .descendants()
        .filter(|n| n.has_tag_name("polyline"))
        .count();
    assert_eq!(polylines, 1);
    assert!(doc
        .descendants()
        .any(|n| n.attribute("class") == Some("axes")));
    assert!(!svg.contains("href"));
}

#[test]
fn polya_small_cutoff_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "polya",
        "--cutoff",
        "40",
        "--n",
        "64",
        "--csv",
        "fig2.csv",
        "--json",
        "fig2.json",
        "--svg",
        "fig2.svg",
    ];
    let first = hyperlap(&args, dir.path());
    assert_eq!(
        code(&first),
        0,
        "{}",
        String::from_utf8_lossy(&first.stderr)
    );
    let csv1 = fs::read(dir.path().join("fig2.csv")).unwrap();
    let json1 = fs::read(dir.path().join("fig2.json")).unwrap();
    let second = hyperlap(&args, dir.path());
    assert_eq!(code(&second), 0);
    assert_eq!(csv1, fs::read(dir.path().join("fig2.csv")).unwrap());
    assert_eq!(json1, fs::read(dir.path().join("fig2.json")).unwrap());

    let csv = String::from_utf8(csv1).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("lambda,count,bound"));
    assert_eq!(lines.next().unwrap().split(',').nth(1), Some("0"));
    let summary: serde_json::Value = serde_json::from_slice(&json1).unwrap();
    assert_eq!(summary["violated"], false);

    let svg = fs::read_to_string(dir.path().join("fig2.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(
        doc.descendants()
            .filter(|n| n.has_tag_name("polyline"))
            .count(),
        2
    );
}

#[test]
fn scaled_down_bound_exits_with_violation() {
    let dir = tempfile::tempdir().unwrap();
    let o = hyperlap(
        &["polya", "--cutoff", "40", "--n", "64", "--scale", "0.01"],
        dir.path(),
    );
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("VIOLATED"));
}

#[test]
fn invalid_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&hyperlap(
            &["sweep", "--alpha", "1", "--beta", "-1"],
            dir.path()
        )),
        2
    );
    assert_eq!(code(&hyperlap(&["sweep", "--cutoff", "-5"], dir.path())), 2);
    assert_eq!(
        code(&hyperlap(&["constants", "--gamma", "-1"], dir.path())),
        2
    );
    assert_eq!(code(&hyperlap(&["nonsense"], dir.path())), 2);
    assert_eq!(
        code(&hyperlap(&["sweep", "--ell-max", "many"], dir.path())),
        2
    );

    fs::write(dir.path().join("bad.json"), r#"{"cutof": 10}"#).unwrap();
    let o = hyperlap(&["constants", "--config", "bad.json"], dir.path());
    assert_eq!(code(&o), 2);

    let o = Command::new(env!("CARGO_BIN_EXE_hyperlap"))
        .args(["constants"])
        .env("HYPERLAP_THREADS", "lots")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn under_resolved_sweep_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = hyperlap(&["sweep", "--cutoff", "100", "--n", "20"], dir.path());
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("certification"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.json"),
        r#"{"cutoff": 60, "n": 64, "ell-max": "auto", "csv": "table.csv"}"#,
    )
    .unwrap();
    let o = hyperlap(
        &["sweep", "--config", "run.json", "--cutoff", "30"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("table.csv")).unwrap();
    assert!(csv.starts_with("ell,k,nu\n"));
    let nus: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(!nus.is_empty());
    assert!(nus.iter().all(|&v| v <= 30.0 * 1.05));
    assert!(String::from_utf8_lossy(&o.stdout).contains("below 30"));
}

#[test]
fn eig_dumps_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let o = hyperlap(
        &[
            "eig",
            "--ell",
            "2",
            "--n",
            "32",
            "--cutoff",
            "50",
            "--dump-matrix",
            "m.csv",
            "--csv",
            "eig.csv",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = fs::read_to_string(dir.path().join("m.csv")).unwrap();
    assert_eq!(m.lines().count(), 31);
    assert!(m.lines().all(|l| l.split(',').count() == 31));
    let eig = fs::read_to_string(dir.path().join("eig.csv")).unwrap();
    assert!(eig.starts_with("k,nu\n1,"));
}

#[test]
fn ltcheck_and_sobolev_report_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = hyperlap(
        &[
            "ltcheck", "--cutoff", "20", "--gamma", "0.5", "--n", "64", "--json",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["ratio"].as_f64().unwrap() <= 1.0);
    assert_eq!(v["product_passed"], true);

    let o = hyperlap(&["sobolev", "--pt", "bump:0.2:0.1", "--json"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["margin"].as_f64().unwrap() > 0.0);

    assert_eq!(
        code(&hyperlap(&["sobolev", "--pt", "square"], dir.path())),
        2
    );
}

#[test]
fn thread_cap_gives_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, name: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_hyperlap"))
            .args(["sweep", "--cutoff", "40", "--n", "64", "--csv", name])
            .current_dir(dir.path())
            .env("HYPERLAP_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0);
        fs::read(dir.path().join(name)).unwrap()
    };
    assert_eq!(run("1", "a.csv"), run("0", "b.csv"));
}
