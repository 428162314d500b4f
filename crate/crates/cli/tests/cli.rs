use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dhom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dhom"))
        .args(args)
        .env_remove("DHOM_SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn witness(dir: &Path, name: &str, sys: &str, seed: &str) -> String {
    let f = write(dir, &format!("{name}.sys"), sys);
    let out = dir.join(format!("{name}.wit")).to_str().unwrap().to_string();
    let o = dhom(&["witness", "--hypersurface", &f, "--seed", seed, "--out", &out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn witness_reports_degree() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "s.sys", "vars: x y z; x^2 + y^2 + z^2 - 1;");
    let out = dir.path().join("s.wit");
    let o = dhom(&["witness", "--hypersurface", &f, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("dim 2 degree 2"));
    assert!(fs::read_to_string(&out).unwrap().contains("degree: 2"));

    let f = write(dir.path(), "h.sys", "vars: x y z; x + 2*y - z + 1;");
    let o = dhom(&["witness", "--hypersurface", &f, "--out", out.to_str().unwrap()]);
    assert!(stdout(&o).contains("degree 1"));
}

#[test]
fn linear_component_witness() {
    let dir = tempfile::tempdir().unwrap();
    let sys = write(dir.path(), "f.sys", "vars: x y z w; x*z; x*w; y*z; y*w;");
    let comp = write(dir.path(), "c.sys", "vars: x y z w; x; y;");
    let out = dir.path().join("c.wit");
    let o = dhom(&["witness", "--linear", &comp, "--system", &sys, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("dim 2 degree 1"));
}

#[test]
fn malformed_system_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "bad.sys", "vars: x y;\nx^2 + ;\n");
    let o = dhom(&["witness", "--hypersurface", &f, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("2:"));
    assert_eq!(code(&dhom(&["intersect"])), 2);
    assert_eq!(code(&dhom(&["frobnicate"])), 2);
}

#[test]
fn membership_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cyl = witness(dir.path(), "cyl", "vars: x y z; x^2 + y^2 - 1;", "3");
    let o = dhom(&["member", "--witness", &cyl, "--point", "1,0,0"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("distance"));
    assert_eq!(code(&dhom(&["member", "--witness", &cyl, "--point", "2,0,0"])), 1);
    assert_eq!(code(&dhom(&["member", "--witness", &cyl, "--point", "1,0"])), 2);
    assert_eq!(code(&dhom(&["member", "--witness", &cyl, "--point", "1,x,0"])), 2);
    assert_eq!(code(&dhom(&["member", "--witness", "/nonexistent.wit", "--point", "1,0,0"])), 2);

    // a stored witness point is a member of its own set
    let ws = dhom::witness::read_witness(&cyl).unwrap();
    let p = &ws.points()[0];
    let text: Vec<String> = p.iter().map(|z| format!("{:.17e} + {:.17e}*i", z.re, z.im)).collect();
    assert_eq!(code(&dhom(&["member", "--witness", &cyl, "--point", &text.join(",")])), 0);
}

#[test]
fn intersect_example_one_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = dhom(&["intersect", "--example", "1", "--mode", "both", "--seed", "7", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("dim 1: 4 witness point(s)"));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["intrinsic_vars"], 2);
    assert!(report["match_distance"].as_f64().unwrap() <= 1e-6);
    let runs = report["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 2);
    for r in runs {
        let stages = r["stages"].as_array().unwrap();
        assert_eq!(stages.len(), 2);
        assert!(stages.iter().all(|s| s["paths"] == 4 && s["converged"] == 4));
    }
    for mode in ["intrinsic", "extrinsic"] {
        let ws = dhom::witness::read_witness(out.join(format!("{mode}_dim1.wit"))).unwrap();
        assert_eq!((ws.dim(), ws.degree()), (1, 4));
    }
}

#[test]
fn intersect_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = witness(dir.path(), "cyl", "vars: x y z; x^2 + y^2 - 1;", "3");
    let b = witness(dir.path(), "sph", "vars: x y z; (x + 0.5)^2 + y^2 + z^2 - 1;", "9");
    let o = dhom(&["intersect", "--wa", &a, "--wb", &b, "--seed", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("dim 1: 4 witness point(s)"));
}

#[test]
fn intersect_example_two_runs_cascade() {
    let o = dhom(&["intersect", "--example", "2", "--mode", "both"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("dim 0: 1 witness point(s)"), "{s}");
    assert!(s.contains("dim 1: 0 witness point(s)"), "{s}");
}

#[test]
fn containment_exits_three() {
    let o = dhom(&["intersect", "--example", "containment"]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("A∩B = B"));
}

#[test]
fn bounds_are_validated() {
    assert_eq!(code(&dhom(&["intersect", "--example", "1", "--hmax", "3"])), 2);
    assert_eq!(code(&dhom(&["intersect", "--example", "1", "--h0", "0"])), 2);
    assert_eq!(code(&dhom(&["intersect", "--example", "nope"])), 2);
}

#[test]
fn seed_from_environment_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let run = |env: Option<&str>, flag: Option<&str>, name: &str| {
        let out = dir.path().join(name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_dhom"));
        cmd.args(["intersect", "--example", "1", "--out", out.to_str().unwrap()]);
        cmd.env_remove("DHOM_SEED");
        if let Some(e) = env {
            cmd.env("DHOM_SEED", e);
        }
        if let Some(f) = flag {
            cmd.args(["--seed", f]);
        }
        assert!(cmd.status().unwrap().success());
        let r: dhom::report::RunReport =
            serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
        r
    };
    assert_eq!(run(Some("5"), None, "env").seed, 5);
    assert_eq!(run(Some("5"), Some("8"), "flag").seed, 8);
    assert_eq!(run(None, None, "none").seed, 0);
}

#[test]
fn reports_reproducible_apart_from_times() {
    let dir = tempfile::tempdir().unwrap();
    let load = |name: &str| {
        let out = dir.path().join(name);
        let o = dhom(&["--threads", "2", "intersect", "--example", "2", "--mode", "both", "--seed", "3", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        let text = fs::read_to_string(out.join("report.json")).unwrap();
        let r: dhom::report::RunReport = serde_json::from_str(&text).unwrap();
        // round trip through the structured form
        assert_eq!(serde_json::from_str::<dhom::report::RunReport>(&serde_json::to_string(&r).unwrap()).unwrap(), r);
        r.without_times()
    };
    assert_eq!(load("a"), load("b"));
}
