use std::process::{Command, Output};

fn jumpsplit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jumpsplit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = jumpsplit(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn simulate_writes_event_rows() {
    let text = stdout(&[
        "simulate",
        "--model",
        "birth_death",
        "--t-end",
        "5",
        "--seed",
        "3",
    ]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("time,channel,X"));
    assert_eq!(lines.next(), Some("0,-1,50"));
    let mut x: i64 = 50;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        x += if f[1] == "0" { 1 } else { -1 };
        assert_eq!(f[2].parse::<i64>().unwrap(), x);
    }
    assert_eq!(
        text,
        stdout(&[
            "simulate",
            "--model",
            "birth_death",
            "--t-end",
            "5",
            "--seed",
            "3"
        ])
    );
}

#[test]
fn simulate_split_warns_off_grid() {
    let out = jumpsplit(&[
        "simulate-split",
        "--model",
        "birth_death",
        "--h",
        "0.3",
        "--t-end",
        "1",
        "--method",
        "strang",
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("not a multiple of h"));
    let out = jumpsplit(&[
        "simulate-split",
        "--model",
        "birth_death",
        "--h",
        "0.25",
        "--t-end",
        "1",
        "--split",
        "1",
    ]);
    assert!(out.status.success());
    assert!(out.stderr.is_empty());
}

#[test]
fn converge_table_and_time_grid() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bd.csv");
    let p = path.to_str().unwrap();
    stdout(&[
        "converge",
        "--model",
        "birth_death",
        "--h-list",
        "1,0.5",
        "--t-eval",
        "20",
        "--n-samples",
        "50",
        "--out",
        p,
    ]);
    let text = std::fs::read_to_string(&path).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "h,M,S,N,half_width");
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("1,") && rows[2].starts_with("0.5,"));

    let text = stdout(&[
        "converge",
        "--model",
        "bimolecular",
        "--h-list",
        "2,1",
        "--t-grid",
        "4:12:4",
        "--n-samples",
        "20",
    ]);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "t,h,M,S,N,half_width");
    assert_eq!(rows.len(), 1 + 2 * 3);
}

#[test]
fn spatial_demo_starts_in_the_first_cell() {
    let text = stdout(&["spatial-demo", "--cells", "3", "--t-end", "2", "--dt", "1"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,X@0,X@1,X@2");
    assert_eq!(lines[1], "0,50,0,0");
    assert_eq!(lines.len(), 4);
}

#[test]
fn paper_experiments_quick_writes_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let out = jumpsplit(&[
        "paper-experiments",
        "bd",
        "--quick",
        "--samples",
        "40",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for name in [
        "birth_death_strong_lie.csv",
        "birth_death_strong_strang.csv",
        "birth_death_weak.csv",
        "birth_death_orders.csv",
    ] {
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(
            text.starts_with("# experiment=bd\n# model=birth_death\n# seed=1\n# samples=40\n"),
            "{name}"
        );
        assert!(text.contains("# version="));
    }
    assert!(!jumpsplit(&["paper-experiments", "fig9", "--quick"])
        .status
        .success());
}

#[test]
fn arrivals_and_inspection() {
    let text = stdout(&["arrivals", "--channels", "2", "--count", "3", "--seed", "9"]);
    assert_eq!(text.lines().count(), 2 + 2 * 3);
    let text = stdout(&["inspect-model", "--model", "illposed", "--radius", "50"]);
    assert!(text.contains("w(x0) = 10"));
    assert!(text.contains("split: first [0, 1], second [2, 3]"));
}

#[test]
fn model_files_from_disk_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    std::fs::write(
        &path,
        jumpsplit::model::builtin_source("dimerization").unwrap(),
    )
    .unwrap();
    let text = stdout(&[
        "simulate",
        "--model",
        path.to_str().unwrap(),
        "--t-end",
        "1",
    ]);
    assert!(text.starts_with("time,channel,X\n0,-1,50\n"));

    std::fs::write(&path, "{ not json").unwrap();
    let out = jumpsplit(&[
        "simulate",
        "--model",
        path.to_str().unwrap(),
        "--t-end",
        "1",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));
    assert!(
        !jumpsplit(&["simulate", "--model", "birth_death", "--t-end", "-1"])
            .status
            .success()
    );
}
