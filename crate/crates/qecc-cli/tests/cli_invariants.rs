//! End-to-end checks of the command-line contract: documented example
//! outputs, exit codes by error class, and the agreement between the exact
//! and sampled fidelity modes.

use std::process::Command;

fn qecc(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_qecc"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout_of(args: &[&str]) -> String {
    let out = qecc(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn field(line: &str, key: &str) -> String {
    line.split_whitespace()
        .find_map(|tok| tok.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key}= in {line}"))
        .to_string()
}

#[test]
fn css_build_reports_the_seven_qubit_parameters() {
    let line = stdout_of(&["css-build"]);
    for part in ["n=7", "k=1", "d=3", "t=1", "rate=1/7"] {
        assert!(line.contains(part), "missing {part} in {line}");
    }
}

#[test]
fn noiseless_mc_fidelity_is_exactly_one() {
    let line = stdout_of(&[
        "mc-fidelity",
        "--p",
        "0",
        "--trials",
        "100",
        "--seed",
        "7",
        "--inputs",
        "2",
    ]);
    let min: f64 = field(&line, "min_fidelity").parse().unwrap();
    assert!((min - 1.0).abs() < 1e-12, "min {min}");
}

#[test]
fn bounds_table_starts_at_the_all_ones_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig1.csv");
    stdout_of(&["bounds-table", "--step", "0.001", "--out", &out.display().to_string()]);
    let body = std::fs::read_to_string(&out).unwrap();
    let mut lines = body.lines();
    assert_eq!(
        lines.next().unwrap(),
        "x,gv_rate,holevo_bound,entanglement_bound"
    );
    let first = lines.next().unwrap();
    assert_eq!(
        first,
        "0.00000000e0,1.00000000e0,1.00000000e0,1.00000000e0"
    );
}

#[test]
fn exact_and_sampled_fidelities_agree_at_low_error_rates() {
    for p in ["0.005", "0.02"] {
        let exact_line = stdout_of(&["exhaustive-fidelity", "--p", p, "--inputs", "2"]);
        let exact: f64 = field(&exact_line, "min_fidelity").parse().unwrap();

        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("mc.csv");
        let mc_line = stdout_of(&[
            "mc-fidelity",
            "--p",
            p,
            "--trials",
            "4000",
            "--inputs",
            "2",
            "--out",
            &out.display().to_string(),
        ]);
        let mc_min: f64 = field(&mc_line, "min_fidelity").parse().unwrap();

        // standard error of the weakest input from the per-input CSV
        let body = std::fs::read_to_string(&out).unwrap();
        let se: f64 = body
            .lines()
            .skip(2)
            .map(|row| {
                let cols: Vec<&str> = row.split(',').collect();
                (
                    cols[1].parse::<f64>().unwrap(),
                    cols[2].parse::<f64>().unwrap(),
                )
            })
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
            .unwrap()
            .1;
        let gap = (mc_min - exact).abs();
        assert!(
            gap <= 3.0 * se.max(1e-9),
            "p={p}: gap {gap} exceeds 3 x {se}"
        );
    }
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["mc-fidelity", "--p", "1.5", "--trials", "10"][..],
        &["mc-fidelity", "--p", "0.1", "--trials", "0"][..],
        &["bounds-table", "--step", "0.5", "--out", "/tmp/x.csv"][..],
        &["encode-dump", "--mode", "w", "--out", "/tmp/x.csv"][..],
        &["no-such-command"][..],
    ] {
        let out = qecc(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn domain_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let det = dir.path().join("det.code");
    std::fs::write(&det, "1100\n0110\n0011\n---\n1111\n").unwrap();
    let det = det.display().to_string();

    // odd-weight error on a distance-2 code: detected, not correctable
    let out = qecc(&["recover-demo", "--code", &det, "--p", "0.5", "--seed", "4"]);
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("UNCORRECTABLE"), "stderr: {msg}");

    let out = qecc(&["code-info", "--code", "/nonexistent/gen.txt"]);
    assert_eq!(out.status.code(), Some(1));

    let out = qecc(&["encode-dump", "--mode", "c", "--inputs", "99", "--out", "/tmp/x.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn seed_lines_stamp_randomized_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("demo.csv");
    let log = dir.path().join("trials.csv");
    stdout_of(&[
        "recover-demo",
        "--p",
        "0.1",
        "--seed",
        "42",
        "--out",
        &out.display().to_string(),
    ]);
    let body = std::fs::read_to_string(&out).unwrap();
    assert!(body.starts_with("# seed=42\n"), "{body}");
    assert!(body.contains("trial,pattern,corrected,fidelity"));

    stdout_of(&[
        "mc-fidelity",
        "--p",
        "0.05",
        "--trials",
        "20",
        "--seed",
        "9",
        "--inputs",
        "0",
        "--trial-log",
        &log.display().to_string(),
    ]);
    let body = std::fs::read_to_string(&log).unwrap();
    assert!(body.starts_with("# seed=9\n"), "{body}");
    // 6 axis inputs x 20 trials, plus the seed line and header
    assert_eq!(body.lines().count(), 2 + 6 * 20);
}

#[test]
fn encode_dump_matches_the_library_amplitudes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c0.csv");
    stdout_of(&[
        "encode-dump",
        "--mode",
        "c",
        "--inputs",
        "0",
        "--out",
        &out.display().to_string(),
    ]);
    let body = std::fs::read_to_string(&out).unwrap();
    let expected = qecc::css::steane()
        .codeword_c(&qecc::gf2::BitWord::zeros(7))
        .unwrap()
        .dump_csv();
    assert_eq!(body, expected);
    assert_eq!(body.lines().count(), 17);
}
