//! Acceptance battery at full size. Prints one line per criterion and exits
//! non-zero if any fails.

use std::process::Command;
use std::time::Instant;

use wigner_core::selftest::{self, CriterionResult, SelftestConfig};

fn cfg() -> SelftestConfig {
    SelftestConfig::default()
}

fn report(r: &CriterionResult) -> bool {
    println!("{}", r.line());
    for ex in &r.failure_examples {
        println!("    {ex}");
    }
    r.pass
}

fn criterion_01_unitary_round_trip() -> bool {
    report(&selftest::criterion_1(&cfg()))
}

fn criterion_02_parity_dichotomy() -> bool {
    report(&selftest::criterion_2(&cfg()))
}

fn criterion_03_modulus_witness() -> bool {
    report(&selftest::criterion_3(&cfg()))
}

fn criterion_04_gram_schmidt_and_spectral() -> bool {
    report(&selftest::criterion_4(&cfg()))
}

fn criterion_05_dyad_calculus() -> bool {
    report(&selftest::criterion_5(&cfg()))
}

fn criterion_06_welldefinedness() -> bool {
    report(&selftest::criterion_6(&cfg()))
}

fn criterion_07_algebra_round_trip() -> bool {
    report(&selftest::criterion_7(&cfg()))
}

fn criterion_08_real_round_trip() -> bool {
    report(&selftest::criterion_8(&cfg()))
}

/// Runs `wigner` and returns (exit code, stdout).
fn wigner(args: &[&str], env: Option<(&str, &str)>) -> (Option<i32>, Vec<u8>) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_wigner"));
    cmd.args(args);
    if let Some((k, v)) = env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("spawn wigner");
    (out.status.code(), out.stdout)
}

fn criterion_09_rejection() -> bool {
    let library = report(&selftest::criterion_9(&cfg()));

    // exit code 1 from the binary on every corrupted kind
    let dir = tempfile::tempdir().unwrap();
    let kinds: [(&str, &[&str]); 4] = [
        ("corrupted-module-unitary", &["--d", "2", "--m", "3"]),
        ("corrupted-module-antiunitary", &["--d", "1", "--m", "3"]),
        ("corrupted-cstar", &["--d", "3"]),
        ("corrupted-real", &["--n", "4"]),
    ];
    let mut problems = Vec::new();
    let mut cases = 0;
    for (kind, sizes) in kinds {
        for eps in ["1e-3", "1e-2", "1e-1"] {
            cases += 1;
            let path = dir.path().join(format!("{kind}-{eps}.json"));
            let path = path.to_str().unwrap();
            let mut args = vec!["gen", "--kind", kind, "--seed", "11", "--epsilon", eps, "--target", "1", "--out", path];
            args.extend_from_slice(sizes);
            if wigner(&args, None).0 != Some(0) {
                problems.push(format!("gen {kind} eps={eps}"));
                continue;
            }
            let (code, _) = wigner(&["verify", "--in", path], None);
            if code != Some(1) {
                problems.push(format!("verify {kind} eps={eps}: exit {code:?}"));
            }
            let (code, stdout) = wigner(&["factorize", "--json", "--in", path], None);
            let verdict = serde_json::from_slice::<serde_json::Value>(&stdout).ok().map(|v| v["verdict"].clone());
            if code != Some(1) || verdict != Some("fail".into()) {
                problems.push(format!("factorize {kind} eps={eps}: exit {code:?}, verdict {verdict:?}"));
            }
        }
    }
    let binary = problems.is_empty();
    println!(
        "criterion  9 {:<40} {} ({cases} corrupted files)",
        "binary exit codes",
        if binary { "PASS" } else { "FAIL" }
    );
    for p in &problems {
        println!("    {p}");
    }
    library && binary
}

fn criterion_10_determinism() -> bool {
    let library = report(&selftest::criterion_10(&cfg()));

    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let (code, stdout) = wigner(&["selftest", "--out", path.to_str().unwrap()], Some(("WIGNER_SEED", "4242")));
        (code, stdout, std::fs::read(&path).unwrap_or_default())
    };
    let a = run("a.json");
    let b = run("b.json");
    let seed_echoed = serde_json::from_slice::<serde_json::Value>(&a.2).map(|v| v["seed"] == 4242).unwrap_or(false);
    let binary = a.0 == Some(0) && !a.2.is_empty() && a == b && seed_echoed;
    println!(
        "criterion 10 {:<40} {} (two full selftest runs, WIGNER_SEED=4242)",
        "byte-identical binary reports",
        if binary { "PASS" } else { "FAIL" }
    );
    library && binary
}

fn main() {
    let start = Instant::now();
    let results = [
        criterion_01_unitary_round_trip(),
        criterion_02_parity_dichotomy(),
        criterion_03_modulus_witness(),
        criterion_04_gram_schmidt_and_spectral(),
        criterion_05_dyad_calculus(),
        criterion_06_welldefinedness(),
        criterion_07_algebra_round_trip(),
        criterion_08_real_round_trip(),
        criterion_09_rejection(),
        criterion_10_determinism(),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed}/{} criteria passed in {:.1}s", results.len(), start.elapsed().as_secs_f64());
    if passed != results.len() {
        std::process::exit(1);
    }
}
