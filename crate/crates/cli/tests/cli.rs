use std::path::Path;
use std::process::{Command, Output};

use mkbell::quantum::{correlations, ghz, seesaw, QuantumOptions};
use mkbell::{mk, svetlichny, CorrelationVector, Polynomial, PolynomialKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const SQRT2: f64 = std::f64::consts::SQRT_2;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mkbell"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn structured(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "structured"]);
    let doc: Value = serde_json::from_str(&ok(&all)).unwrap();
    assert_eq!(doc["schema_version"], 1);
    doc["result"].clone()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exited normally")
}

fn term_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn poly_mk3_has_four_half_terms() {
    let out = ok(&["poly", "mk", "3"]);
    let lines = term_lines(&out);
    assert_eq!(lines.len(), 4);
    assert!(lines
        .iter()
        .all(|l| l.starts_with("+1/2^1 ") || l.starts_with("-1/2^1 ")));
    assert!(out.contains("# support_size 4"));
}

#[test]
fn poly_even_svetlichny_is_mk() {
    assert_eq!(ok(&["poly", "svetlichny", "4"]), ok(&["poly", "mk", "4"]));
}

#[test]
fn poly_single_party() {
    assert_eq!(term_lines(&ok(&["poly", "mk", "1"])), ["+1/2^0 * A1"]);
}

#[test]
fn poly_output_reingests_identically() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for kind in PolynomialKind::ALL {
        for n in 2..=5u32 {
            if kind.build(n).is_err() {
                continue;
            }
            let text = ok(&["poly", kind.name(), &n.to_string()]);
            let path = dir.path().join(format!("{kind}-{n}.txt"));
            std::fs::write(&path, &text).unwrap();
            let reread = ok(&["poly", "--poly-file", path.to_str().unwrap()]);
            assert_eq!(reread, text);

            let custom = Polynomial::parse_text(&text).unwrap();
            let builtin = kind.build(n).unwrap();
            for _ in 0..100 {
                let cv = CorrelationVector::from_fn(n, |_| rng.random_range(-1.0..=1.0)).unwrap();
                assert_eq!(
                    custom.evaluate(&cv).unwrap(),
                    builtin.evaluate(&cv).unwrap()
                );
            }
        }
    }
}

#[test]
fn bounds_svetlichny3() {
    let r = structured(&["bounds", "svetlichny", "3"]);
    assert_eq!(r["local"]["value_exact"], "1/2^0");
    assert_eq!(r["hybrid"]["partitions"].as_array().unwrap().len(), 3);
    assert_eq!(r["hybrid"]["uniform"], true);
    assert_eq!(r["hybrid"]["max"]["value_exact"], "1/2^0");
    assert_eq!(r["algebraic"]["value_exact"], "2/2^0");
}

#[test]
fn bounds_mk4_hybrid_all_partitions() {
    let r = structured(&["bounds", "mk", "4", "--models", "hybrid"]);
    let parts = r["hybrid"]["partitions"].as_array().unwrap();
    assert_eq!(parts.len(), 7);
    assert!(parts.iter().all(|b| b["value"] == 2.0));
    assert!(r.get("local").is_none());
}

#[test]
fn bounds_single_partition() {
    let r = structured(&[
        "bounds",
        "mk",
        "3",
        "--partition",
        "A=3|B=1,2",
        "--models",
        "hybrid",
    ]);
    let b = &r["hybrid"]["partitions"][0];
    assert_eq!(b["value_exact"], "2/2^0");
    assert_eq!(b["witness"]["partition"], "A=3|B=1,2");
}

#[test]
fn qmax_examples() {
    let v = structured(&["qmax", "mk", "4"])["value"].as_f64().unwrap();
    assert!((v - 2.0 * SQRT2).abs() < 1e-6, "{v}");
    let v = structured(&["qmax", "svetlichny", "3", "--state", "ghz:3"])["value"]
        .as_f64()
        .unwrap();
    assert!((v - SQRT2).abs() < 1e-6, "{v}");
    let v = structured(&["qmax", "mk", "2"])["value"].as_f64().unwrap();
    assert!((v - SQRT2).abs() < 1e-6, "{v}");
}

#[test]
fn structured_output_is_deterministic() {
    for args in [
        &["qmax", "mk", "3", "--format", "structured"][..],
        &[
            "qmax",
            "svetlichny",
            "3",
            "--state",
            "ghz:3",
            "--seed",
            "7",
            "--format",
            "structured",
        ],
        &["table1", "--format", "structured"],
    ] {
        assert_eq!(run(args).stdout, run(args).stdout);
    }
    let a = run(&["qmax", "mk", "3", "--seed", "1", "--format", "structured"]).stdout;
    let b = run(&["qmax", "mk", "3", "--seed", "2", "--format", "structured"]).stdout;
    assert_ne!(a, b);
}

#[test]
fn classify_given_values() {
    let r = structured(&["classify", "--poly", "svetlichny", "3", "--value", "1.2"]);
    assert_eq!(r["conclusion"]["kind"], "genuinely_nonseparable");
    assert!((r["margin"].as_f64().unwrap() - 0.2).abs() < 1e-12);
    let r = structured(&["classify", "--poly", "mk", "3", "--value", "1.0"]);
    assert_eq!(r["conclusion"]["kind"], "no_conclusion");
    let text = ok(&["classify", "--poly", "svetlichny", "3", "--value", "1.2"]);
    assert!(text.contains("genuine 3-party non-separability"));
}

#[test]
fn classify_state_with_optimal_frame() {
    let dir = tempfile::tempdir().unwrap();
    let frame = dir.path().join("frame.txt");
    ok(&[
        "qmax",
        "mk",
        "3",
        "--state",
        "ghz:3",
        "--write-frame",
        frame.to_str().unwrap(),
    ]);
    let r = structured(&[
        "classify",
        "--poly",
        "mk",
        "3",
        "--state",
        "ghz:3",
        "--frame",
        frame.to_str().unwrap(),
    ]);
    assert!((r["value"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert_eq!(r["conclusion"]["kind"], "entangled");
    assert_eq!(r["conclusion"]["min_depth"], 3);
}

fn write_ghz3_correlations(dir: &Path) -> std::path::PathBuf {
    let p = svetlichny(3).unwrap();
    let psi = ghz(3).unwrap();
    let best = seesaw(&p, &psi, &QuantumOptions::new(5)).unwrap();
    let cv = correlations(&psi, &best.frame).unwrap();
    let value = p.evaluate(&cv).unwrap();
    assert!((value - SQRT2).abs() < 1e-6, "{value}");
    let path = dir.join("ghz3.txt");
    std::fs::write(&path, cv.to_text()).unwrap();
    path
}

#[test]
fn classify_correlation_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_ghz3_correlations(dir.path());
    let r = structured(&[
        "classify",
        "--poly",
        "svetlichny",
        "3",
        "--correlations",
        path.to_str().unwrap(),
    ]);
    assert!((r["value"].as_f64().unwrap() - SQRT2).abs() < 1e-6);
    assert_eq!(r["conclusion"]["kind"], "genuinely_nonseparable");
    assert_eq!(r["conclusion"]["parties"], 3);
}

#[test]
fn table1_text_and_structured() {
    let text = ok(&["table1"]);
    for cell in ["2√2", "4", "√2"] {
        assert!(text.contains(cell));
    }
    let r = structured(&["table1"]);
    let rows = r["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    let exact: Vec<Vec<String>> = rows
        .iter()
        .map(|row| {
            row["cells"]
                .as_array()
                .unwrap()
                .iter()
                .map(|c| c["expected"]["exact"].as_str().unwrap().to_string())
                .collect()
        })
        .collect();
    assert_eq!(exact[0], ["1", "√2", "2", "2", "2"]);
    assert_eq!(exact[1], ["1", "1", "1", "√2", "2"]);
    assert_eq!(exact[2], ["1", "√2", "2", "2√2", "4"]);
}

#[test]
fn table1_fault_injection_fails() {
    let out = run(&["table1", "--inject-fault", "M3:3"]);
    assert_eq!(out.status.code(), Some(5));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("M3/3QM"), "{err}");
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["poly", "mk", "0"]), 2);
    assert_eq!(code(&["poly", "bogus", "3"]), 2);
    assert_eq!(code(&["poly", "svetlichny-minus", "4"]), 2);
    assert_eq!(code(&["--restarts", "0", "poly", "mk", "2"]), 2);
    assert_eq!(code(&["--seesaw-tol", "0.5", "poly", "mk", "2"]), 2);
    assert_eq!(code(&["classify", "--poly", "mk", "3"]), 2);

    let out = run(&["bounds", "mk", "11", "--models", "local"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--local-cap"));
    let out = run(&["qmax", "mk", "3", "--spectral-cap", "2"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--spectral-cap"));
    assert_eq!(
        code(&["bounds", "mk", "5", "--models", "local", "--local-cap", "4"]),
        3
    );

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "n=3\n000 1\n0x1 0.5\n").unwrap();
    let out = run(&[
        "classify",
        "--poly",
        "mk",
        "3",
        "--correlations",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let partial = dir.path().join("partial.txt");
    std::fs::write(&partial, "n=3\n100 1\n010 1\n").unwrap();
    let out = run(&[
        "classify",
        "--poly",
        "mk",
        "3",
        "--correlations",
        partial.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("A1 A2 A3'") && err.contains("A1' A2' A3'"),
        "{err}"
    );

    assert_eq!(
        code(&[
            "classify",
            "--poly",
            "mk",
            "3",
            "--correlations",
            "/nonexistent/c.txt"
        ]),
        4
    );
    assert_eq!(
        code(&["classify", "--poly", "mk", "3", "--value", "2.5"]),
        4
    );
    assert_eq!(code(&["table1", "--inject-fault", "S3:0"]), 5);
}

#[test]
fn show_config_lists_defaults() {
    let text = ok(&["--show-config"]);
    assert!(text.contains("0x5eed") && text.contains("restarts          16"));
    let doc: Value =
        serde_json::from_str(&ok(&["--show-config", "--format", "structured"])).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["config"]["seed"], 0x5EED);
    let doc: Value = serde_json::from_str(&ok(&[
        "--show-config",
        "--seed",
        "0x10",
        "--format",
        "structured",
    ]))
    .unwrap();
    assert_eq!(doc["config"]["seed"], 16);
}

#[test]
fn mk_helpers_agree_with_cli() {
    let text = ok(&["poly", "mk", "5"]);
    assert_eq!(Polynomial::parse_text(&text).unwrap(), mk(5).unwrap());
}
