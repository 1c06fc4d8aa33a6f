use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn toomlab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toomlab")).args(args).current_dir(dir).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn verify_is_deterministic_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a.csv", "b.csv"] {
        let o = toomlab(&["verify", "span_decr", "--trials", "30", "--seed", "5", "--out", out], dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.csv")).unwrap());
    assert!(a.starts_with(b"suite,case_id,seed,inputs,lhs,rhs,pass\n"));
}

#[test]
fn unknown_suite_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = toomlab(&["verify", "nope"], dir.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown suite"));
}

#[test]
fn consensus_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = || toomlab(&["consensus", "--sizes", "8,12", "--trials", "5", "--seed", "3"], dir.path());
    let (a, b) = (run(), run());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 11);
}

#[test]
fn evolve_render_span_thickness() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("seg5.toom"), "space: plane\nooooo\n").unwrap();

    let o = toomlab(&["span", "--d", "1/3", "seg5.toom"], dir.path());
    assert!(stdout(&o).starts_with("span 5\n"));
    let o = toomlab(&["span", "--d", "2", "seg5.toom"], dir.path());
    assert!(stdout(&o).starts_with("span 10\n"));

    let o = toomlab(&["thickness", "--alpha", "6", "seg5.toom"], dir.path());
    assert!(stdout(&o).starts_with("thickness 1\n"), "{}", stdout(&o));

    let o = toomlab(&["render", "seg5.toom"], dir.path());
    assert_eq!(stdout(&o), ".......\n.ooooo.\n.......\n");

    let o = toomlab(&["evolve", "--rule", "rplus", "--steps", "1", "seg5.toom", "-o", "next.toom"], dir.path());
    assert!(o.status.success());
    let next = fs::read_to_string(dir.path().join("next.toom")).unwrap();
    assert_eq!(next, "space: plane\norigin: 0 0\nooo.\noooo\n");
}

#[test]
fn evolve_with_failures_on_torus() {
    let dir = tempfile::tempdir().unwrap();
    let mut ring = String::from("space: torus 4\n");
    ring += "....\n....\noooo\n....\n";
    fs::write(dir.path().join("ring.toom"), ring).unwrap();
    fs::write(dir.path().join("faults.txt"), "1 0 3 1\n").unwrap();
    let o = toomlab(&["evolve", "--rule", "r", "--steps", "1", "--failures", "faults.txt", "ring.toom"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), "space: torus 4\no...\n....\noooo\n....\n");
}

#[test]
fn pullback_q_of_seg5() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("seg5.toom"), "space: plane\nooooo\n").unwrap();
    fs::write(
        dir.path().join("cut.txt"),
        "C: (2,0) (2,1)\nA1: (0,0) (1,0) (0,1) (1,1)\nA2: (3,0) (4,0) (5,0) (3,1) (4,1)\n",
    )
    .unwrap();
    let o = toomlab(&["pullback", "q", "--cut", "cut.txt", "seg5.toom"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let c_line = stdout(&o).lines().find(|l| l.starts_with("C:")).unwrap().to_string();
    assert_eq!(c_line.split_whitespace().count(), 2, "{c_line}");
}

#[test]
fn bad_input_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toom"), "space: torus 2\noo\noo\n").unwrap();
    let o = toomlab(&["render", "bad.toom"], dir.path());
    assert!(!o.status.success());
    assert!(!o.stderr.is_empty());
}
