use std::path::Path;
use std::process::Command;

fn bf2(args: &[&str], dir: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_bf2"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stdout(o: &std::process::Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn help_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(bf2(&["--help"], dir.path()).status.code(), Some(0));
    assert_eq!(bf2(&["--version"], dir.path()).status.code(), Some(0));
    assert_eq!(bf2(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(bf2(&["roc", "x.csv", "-o", "r.csv", "--filter", "median"], dir.path()).status.code(), Some(1));
}

#[test]
fn csv_without_geometry_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("e.csv"), "x,y,t,p\n1,1,0,1\n").unwrap();
    let o = bf2(&["filter", "e.csv", "-o", "out.csv"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn bad_data_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("e.csv"), "x,y,t,p\n1,1,5,1\n1,2,3,1\n").unwrap();
    let o = bf2(&["filter", "e.csv", "--geometry", "10x10", "-o", "out.csv"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = bf2(&["filter", "e.csv", "--geometry", "10x10", "--sort", "-o", "out.csv"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    std::fs::write(dir.path().join("bad.csv"), "x,y,t,p\n1,1,zz,1\n").unwrap();
    let o = bf2(&["filter", "bad.csv", "--geometry", "10x10", "-o", "out.csv"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(bf2(&["filter", "missing.bin", "-o", "out.csv"], dir.path()).status.code(), Some(2));
}

#[test]
fn filter_then_evaluate_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(bf2(&["synth", "scene", "--geometry", "64x48", "--duration-us", "100000", "--noise-rate-hz", "5", "-o", "s.csv"], p).status.success());
    let o = bf2(&["filter", "s.csv", "--geometry", "64x48", "-o", "f.csv"], p);
    assert!(o.status.success());
    let text = std::fs::read_to_string(p.join("f.csv")).unwrap();
    assert!(text.starts_with("# bf2 filter "));
    assert!(text.lines().nth(1).unwrap().contains("pred"));
    let o = bf2(&["evaluate", "f.csv", "--geometry", "64x48", "--from-predictions"], p);
    assert!(o.status.success());
    assert!(stdout(&o).contains("tp="));

    // A file whose predictions equal the labels scores perfectly.
    let perfect: String = text
        .lines()
        .map(|l| {
            if l.starts_with('#') || l.starts_with('x') {
                l.to_string()
            } else {
                let mut f: Vec<&str> = l.split(',').collect();
                let label = f[4];
                *f.last_mut().unwrap() = label;
                f.join(",")
            }
        })
        .collect::<Vec<_>>()
        .join("\n");
    std::fs::write(p.join("perfect.csv"), perfect).unwrap();
    let o = bf2(&["evaluate", "perfect.csv", "--geometry", "64x48", "--from-predictions"], p);
    assert!(stdout(&o).contains("f1=1.000000"), "{}", stdout(&o));
}

#[test]
fn roc_writes_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(bf2(&["synth", "scene", "--geometry", "64x48", "--duration-us", "200000", "--noise-rate-hz", "5", "-o", "s.bin"], p).status.success());
    let o = bf2(&["roc", "s.bin", "--filter", "bf2", "-o", "roc.csv", "--plot", "roc.svg"], p);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(p.join("roc.csv")).unwrap();
    let rows = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 1 + 16);
    assert!(text.lines().next().unwrap().starts_with("# bf2 roc "));
    assert!(text.lines().last().unwrap().starts_with("# auc="));
    assert!(std::fs::read_to_string(p.join("roc.svg")).unwrap().contains("<svg"));
    let o = bf2(&["roc", "s.bin", "--filter", "hashheat", "--points", "4", "-o", "hh.csv"], p);
    assert!(o.status.success());
    let text = std::fs::read_to_string(p.join("hh.csv")).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("segment_length,"));
}

#[test]
fn predict_dse_and_resources() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(bf2(&["synth", "scene", "--geometry", "64x48", "--duration-us", "200000", "--noise-rate-hz", "5", "-o", "s.bin"], p).status.success());
    assert!(bf2(&["predict", "s.bin", "-o", "pred.csv", "--plot", "p.svg"], p).status.success());
    let text = std::fs::read_to_string(p.join("pred.csv")).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(bf2(&["dse", "s.bin", "-o", "dse.csv"], p).status.success());
    let text = std::fs::read_to_string(p.join("dse.csv")).unwrap();
    assert_eq!(text.lines().count(), 2 + 5);
    let o = bf2(&["resources", "-o", "r.csv"], p);
    assert!(o.status.success());
    assert!(stdout(&o).contains("bf2_throughput_eps=18444444.4"));
    let text = std::fs::read_to_string(p.join("r.csv")).unwrap();
    assert!(text.contains("346x260,bf2,262144,32.000,"));
    assert!(text.contains("346x260,baf,2878720,351.406,"));
    assert_eq!(bf2(&["resources", "--costs", "nope.toml", "-o", "r.csv"], p).status.code(), Some(2));
}

#[test]
fn outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    for out in ["a.csv", "b.csv"] {
        assert!(bf2(&["synth", "noise", "--geometry", "32x32", "--rate-hz", "50", "--duration-us", "100000", "--seed", "4", "-o", out], p).status.success());
    }
    let a = std::fs::read(p.join("a.csv")).unwrap();
    let b = std::fs::read(p.join("b.csv")).unwrap();
    assert_eq!(a, b);
    assert!(String::from_utf8_lossy(&a).starts_with("# bf2 synth noise geometry=32x32 rate_hz=50 duration_us=100000 seed=4"));
}
