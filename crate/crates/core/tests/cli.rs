use std::path::Path;

use wigner_core::cli::{cli_main, EXIT_FAIL, EXIT_PASS, EXIT_USAGE};

fn run(args: &[&str]) -> i32 {
    cli_main(std::iter::once("wigner").chain(args.iter().copied()))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gen_factorize_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("i.json");
    let fac = dir.path().join("f.json");
    let rep = dir.path().join("r.json");
    assert_eq!(run(&["gen", "--kind", "module-unitary", "--d", "2", "--m", "3", "--seed", "1", "--out", p(&inst)]), EXIT_PASS);
    assert!(inst.exists());
    assert_eq!(
        run(&["factorize", "--in", p(&inst), "--samples", "32", "--out", p(&fac), "--report", p(&rep)]),
        EXIT_PASS
    );

    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(report["verdict"], "pass");
    assert!(report.get("wall_clock_ms").is_none());
    for row in report["residuals"].as_array().unwrap() {
        assert!(row["value"].as_f64().unwrap() <= 1e-8, "{row}");
    }
    let f: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&fac).unwrap()).unwrap();
    assert_eq!(f["parity"], "auto");
    assert_eq!(f["W"]["rows"], 3);
    assert_eq!(f["phases"].as_array().unwrap().len(), 6 + 32);

    assert_eq!(run(&["report", "--in", p(&rep)]), EXIT_PASS);
    assert_eq!(run(&["verify", "--in", p(&inst)]), EXIT_PASS);
}

#[test]
fn timing_is_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("i.json");
    let rep = dir.path().join("r.json");
    assert_eq!(run(&["gen", "--kind", "real", "--n", "3", "--out", p(&inst)]), EXIT_PASS);
    assert_eq!(run(&["factorize", "--in", p(&inst), "--timing", "--report", p(&rep)]), EXIT_PASS);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    assert!(report["wall_clock_ms"].as_f64().unwrap() >= 0.0);
}

#[test]
fn corrupted_instances_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("c.json");
    assert_eq!(run(&["gen", "--kind", "corrupted-module", "--d", "2", "--m", "3", "--seed", "1", "--out", p(&inst)]), EXIT_PASS);
    let stored: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&inst).unwrap()).unwrap();
    assert_eq!(stored["corruption"]["epsilon"], 1e-2);
    assert_eq!(run(&["verify", "--in", p(&inst)]), EXIT_FAIL);
    assert_eq!(run(&["factorize", "--in", p(&inst)]), EXIT_FAIL);
}

#[test]
fn usage_and_io_errors_exit_two() {
    assert_eq!(run(&[]), EXIT_USAGE);
    assert_eq!(run(&["frobnicate"]), EXIT_USAGE);
    assert_eq!(run(&["gen", "--kind", "module-antiunitary", "--d", "2", "--m", "3"]), EXIT_USAGE);
    assert_eq!(run(&["gen", "--kind", "cstar"]), EXIT_USAGE);
    assert_eq!(run(&["gen", "--kind", "real", "--n", "2", "--epsilon", "1e-2", "--target", "5"]), EXIT_USAGE);
    assert_eq!(run(&["verify", "--in", "/nonexistent/instance.json"]), EXIT_USAGE);

    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, "{\"kind\": 3}").unwrap();
    assert_eq!(run(&["factorize", "--in", p(&junk)]), EXIT_USAGE);
    assert_eq!(run(&["report", "--in", p(&junk)]), EXIT_USAGE);
}

#[test]
fn gen_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for path in [&a, &b] {
        assert_eq!(run(&["gen", "--kind", "cstar", "--d", "3", "--seed", "9", "--out", p(path)]), EXIT_PASS);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn selftest_report_can_be_reprinted() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    assert_eq!(run(&["selftest", "--seed", "5", "--seeds", "2", "--out", p(&out)]), EXIT_PASS);
    assert_eq!(run(&["report", "--in", p(&out)]), EXIT_PASS);
}
