use std::path::Path;
use std::process::{Command, Output};

use infsup_cli::report::{read_report, CSV_HEADER};

fn infsup(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_infsup"))
        .args(args)
        .current_dir(dir)
        .env_remove("INFSUP_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn compute_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = infsup(
        dir.path(),
        &["compute", "--domain", "unit_square", "--ell", "1", "--levels", "3"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc = read_report(&dir.path().join("report.json")).unwrap();
    assert_eq!(doc.levels.len(), 3);
    assert!(doc.summary.passed);
    assert_eq!(doc.config.refinement_levels, vec![0, 1, 2]);
    assert!(stdout(&o).contains("report written to report.json"));
    let leftovers: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(leftovers.len(), 1);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["compute", "--domain", "unit_square", "--ell", "2"],
        &["compute", "--domain", "hexagon"],
        &["compute", "--domain", "unit_square", "--levels", "0"],
        &["compute", "--domain", "unit_square", "--levels", "99"],
        &["compute", "--domain", "unit_square", "--bogus"],
        &["compute", "--domain", "unit_square", "--rank-tol", "0.5"],
        &["compute", "--domain", "unit_disk", "--inner-radius", "0.3"],
        &["compute", "--domain", "annulus", "--inner-radius", "1.5"],
        &["convergence", "--domain", "unit_square", "--levels", "2"],
        &["compute", "--domain", "unit_cube", "--lbb", "--ell", "2"],
        &["abstract-selftest", "--max-dim", "1"],
        &["oracle-2d", "--domain", "unit_cube"],
        &["mesh-info"],
        &["frobnicate"],
    ];
    for args in cases {
        let o = infsup(dir.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn abstract_selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = infsup(
        dir.path(),
        &["abstract-selftest", "--pairs", "200", "--max-dim", "40", "--seed", "0"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let line = out.lines().find(|l| l.starts_with("max identity deviation:")).unwrap();
    let value: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(value <= 1e-8);
}

#[test]
fn abstract_selftest_threshold_violation_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let o = infsup(
        dir.path(),
        &[
            "abstract-selftest",
            "--pairs",
            "20",
            "--identity-threshold",
            "1e-300",
            "--output",
            "s.json",
        ],
    );
    assert_eq!(o.status.code(), Some(4));
    let doc = read_report(&dir.path().join("s.json")).unwrap();
    assert!(!doc.summary.passed);
    assert_eq!(doc.config.identity_threshold, Some(1e-300));
}

#[test]
fn mesh_info_prints_betti_numbers() {
    let dir = tempfile::tempdir().unwrap();
    for (domain, expected) in [
        ("unit_disk", "b = (1, 0)"),
        ("annulus", "b = (1, 1)"),
        ("unit_cube", "b = (1, 0, 0)"),
        ("l_shape", "b = (1, 0)"),
    ] {
        let o = infsup(dir.path(), &["mesh-info", "--domain", domain, "--resolution", "2"]);
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).lines().any(|l| l == expected), "{domain}: {}", stdout(&o));
    }
}

#[test]
fn mesh_info_reads_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("ok.mesh"), "2 4 2\n0 0\n1 0\n1 1\n0 1\n1 2 3\n1 3 4\n").unwrap();
    let o = infsup(dir.path(), &["mesh-info", "--mesh", "ok.mesh", "--refine", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("cells = 8"));
    assert!(stdout(&o).contains("b = (1, 0)"));

    std::fs::write(dir.path().join("bad.mesh"), "2 4 2\n0 0\n1 0\n1 x\n0 1\n1 2 3\n1 3 4\n").unwrap();
    let o = infsup(dir.path(), &["mesh-info", "--mesh", "bad.mesh"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));

    let o = infsup(dir.path(), &["mesh-info", "--mesh", "missing.mesh"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_on_disk_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = infsup(
        dir.path(),
        &[
            "oracle-2d",
            "--domain",
            "unit_disk",
            "--degree",
            "4",
            "--output",
            "o.json",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let doc = read_report(&dir.path().join("o.json")).unwrap();
    assert!((doc.summary.holomorphic_gamma.unwrap() - 1.0).abs() <= 1e-8);
}

#[test]
fn identical_invocations_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    for format in ["json", "csv"] {
        let mut files = Vec::new();
        for _ in 0..2 {
            let args = [
                "compute",
                "--domain",
                "l_shape",
                "--resolution",
                "1",
                "--levels",
                "2",
                "--lbb",
                "--format",
                format,
                "--output",
                "r.out",
            ];
            let o = infsup(dir.path(), &args);
            assert_eq!(o.status.code(), Some(0));
            files.push(std::fs::read(dir.path().join("r.out")).unwrap());
        }
        assert_eq!(files[0], files[1], "{format}");
    }
}

#[test]
fn csv_report_layout() {
    let dir = tempfile::tempdir().unwrap();
    let o = infsup(
        dir.path(),
        &["compute", "--domain", "unit_square", "--levels", "2", "--format", "csv"],
    );
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0,"));
    assert!(lines[1].ends_with(",1,0,0,"));
}

#[test]
fn thread_cap_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let run = |value: &str| {
        Command::new(env!("CARGO_BIN_EXE_infsup"))
            .args(["mesh-info", "--domain", "unit_square"])
            .current_dir(dir.path())
            .env("INFSUP_THREADS", value)
            .output()
            .unwrap()
            .status
            .code()
    };
    assert_eq!(run("2"), Some(0));
    assert_eq!(run("0"), Some(2));
    assert_eq!(run("many"), Some(2));
}

#[test]
fn convergence_reports_extrapolation() {
    let dir = tempfile::tempdir().unwrap();
    let o = infsup(
        dir.path(),
        &[
            "convergence",
            "--domain",
            "unit_disk",
            "--levels",
            "3",
            "--gamma-direct-max-dofs",
            "100",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc = read_report(&dir.path().join("report.json")).unwrap();
    let series = doc.summary.convergence.unwrap();
    assert_eq!(series.values.len(), 3);
    assert!(series.extrapolated_value.is_some());
    assert!(doc.levels.iter().all(|r| r.polygonal_approximation));
}
