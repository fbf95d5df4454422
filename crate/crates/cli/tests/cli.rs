use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn volterra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_volterra"))
        .args(args)
        .env("VOLTERRA_THREADS", "2")
        .output()
        .unwrap()
}

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/examples").join(name)
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn expr_eval_prints_the_value() {
    let out = volterra(&["expr-eval", "exp(1)"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "2.718281828459045");
    let out = volterra(&["expr-eval", "x^2 + u", "--var", "x=3", "--var", "u=0.5"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "9.5");
}

#[test]
fn unbound_variable_is_an_operational_error() {
    let out = volterra(&["expr-eval", "x + 1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn solve_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = example("banas_mod.cfg");
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out in [&a, &b] {
        let o = volterra(&["solve", "--config", arg(&cfg), "--h", "0.015625", "--out", arg(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (a, b) = (fs::read(a).unwrap(), fs::read(b).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn schedule_round_trip_reproduces_the_solution() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = example("banas_mod.cfg");
    let sched = dir.path().join("w.csv");
    let (direct, via) = (dir.path().join("direct.csv"), dir.path().join("via.csv"));
    let o = volterra(&["weights", "--config", arg(&cfg), "--out", arg(&sched)]);
    assert!(o.status.success());
    let header = fs::read_to_string(&sched).unwrap();
    assert!(header.starts_with("n,L_n,Lhat_n,a_n,k_n,r_n,phi_b,phi_eta"), "{header}");
    assert!(volterra(&["solve", "--config", arg(&cfg), "--h", "0.015625", "--out", arg(&direct)]).status.success());
    let o = volterra(&[
        "solve", "--config", arg(&cfg), "--h", "0.015625", "--schedule", arg(&sched), "--out", arg(&via),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(direct).unwrap(), fs::read(via).unwrap());
}

#[test]
fn goursat_example_matches_its_closed_form() {
    let o = volterra(&["example", "goursat"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = String::from_utf8(o.stdout).unwrap();
    assert!(csv.starts_with("x1,x2,u\n"));
    let o = volterra(&["example", "goursat", "--zero-boundary", "--f", "2", "--h", "0.0625"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn show_config_prints_the_bundled_file() {
    let o = volterra(&["example", "second-kind", "--show-config"]);
    assert!(o.status.success());
    assert_eq!(o.stdout, fs::read(example("second_kind.cfg")).unwrap());
}

#[test]
fn bad_config_exits_with_one_and_names_the_section() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "[domain]\ndim = 1\nlower = [0]\nupper = [1]\nlambda_lower = [\"0\"]\nlambda_upper = [\"x\"]\ntau = \"x\"\n[F]\nf = \"u\"\nb = \"1\"\n[outer]\ng = \"1\"\nphi = \"x/2\"\n").unwrap();
    let o = volterra(&["solve", "--config", arg(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("[kernel]"));
    let o = volterra(&["solve", "--config", arg(&dir.path().join("missing.cfg"))]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn check_passes_and_fails_by_exit_code() {
    let o = volterra(&["check", "--config", arg(&example("banas_mod.cfg")), "--samples", "200"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("crossing.cfg");
    let text = fs::read_to_string(example("second_kind.cfg"))
        .unwrap()
        .replace("f = \"u\"", "h1 = \"u + 1\"\nh2 = \"u\"");
    fs::write(&cfg, text).unwrap();
    let o = volterra(&["check", "--config", arg(&cfg), "--samples", "200"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}
