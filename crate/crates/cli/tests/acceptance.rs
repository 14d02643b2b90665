//! Command-line acceptance: the exit-code contract, the worked example on
//! the bundled fixtures, and byte-identical reruns of every command.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .display()
        .to_string()
}

fn scratch_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("covert-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn covert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covert"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 output")
}

fn code_of(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

#[test]
fn validate_contract() {
    let ok = covert(&[
        "validate",
        &fixture("plant.json"),
        "--supervisor",
        &fixture("supervisor.json"),
    ]);
    assert_eq!(code_of(&ok), 0, "stderr: {:?}", String::from_utf8_lossy(&ok.stderr));
    assert!(stdout_of(&ok).contains("plant: ok"));
    assert!(stdout_of(&ok).contains("supervisor: ok"));

    // referential violations exit nonzero and are reported
    let dir = scratch_dir("validate");
    let broken = dir.join("broken.json");
    let text = std::fs::read_to_string(fixture("plant.json"))
        .unwrap()
        .replace("\"to\": \"5\"", "\"to\": \"55\"");
    std::fs::write(&broken, text).unwrap();
    let bad = covert(&["validate", broken.to_str().unwrap()]);
    assert_eq!(code_of(&bad), 1);
    assert!(stdout_of(&bad).contains("unknown state '55'"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn estimate_prints_sorted_sets() {
    let out = covert(&[
        "estimate",
        "--plant",
        &fixture("plant.json"),
        "--supervisor",
        &fixture("supervisor.json"),
        "--obs",
        "b",
    ]);
    assert_eq!(code_of(&out), 0);
    assert_eq!(stdout_of(&out), "current: {3,4}\ninitial: {1,2}\n");
}

#[test]
fn check_opacity_exit_codes() {
    let opaque = covert(&[
        "check-opacity",
        "--plant",
        &fixture("plant.json"),
        "--supervisor",
        &fixture("supervisor.json"),
    ]);
    assert_eq!(code_of(&opaque), 0);
    assert_eq!(stdout_of(&opaque), "opaque\n");

    let leaky = covert(&[
        "check-opacity",
        "--plant",
        &fixture("plant.json"),
        "--supervisor",
        &fixture("supervisor_permissive.json"),
    ]);
    assert_eq!(code_of(&leaky), 3);
    let text = stdout_of(&leaky);
    assert!(text.contains("not opaque"));
    assert!(text.contains("witness: b c"));
    assert!(text.contains("estimate: {1}"));
}

#[test]
fn synthesize_writes_structure_with_erase_choice() {
    let dir = scratch_dir("synthesize");
    let out_path = dir.join("sas.json");
    let out = covert(&[
        "synthesize",
        "--plant",
        &fixture("plant.json"),
        "--supervisor",
        &fixture("supervisor.json"),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code_of(&out), 0, "stderr: {:?}", String::from_utf8_lossy(&out.stderr));
    let text = stdout_of(&out);
    assert!(text.contains("attackable"));
    assert!(text.contains("witness: b c"));

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    // the attack state pending b below the initial state pins the erasure
    let initial = doc["initial"].as_str().unwrap().to_string();
    let edges = doc["edges"].as_array().unwrap();
    let to_attack = edges
        .iter()
        .find(|e| e["from"] == initial.as_str() && e["label"] == "b")
        .expect("initial state offers b");
    let attack_id = to_attack["to"].as_str().unwrap();
    assert_eq!(doc["choice"][attack_id], "erase");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn synthesize_reports_unattackable_with_exit_2() {
    // strip every vulnerability flag: nothing can be tampered with
    let dir = scratch_dir("unattackable");
    let plant = dir.join("plant.json");
    let text = std::fs::read_to_string(fixture("plant.json"))
        .unwrap()
        .replace("\"vulnerable\": true", "\"vulnerable\": false");
    std::fs::write(&plant, text).unwrap();
    let out = covert(&[
        "synthesize",
        "--plant",
        plant.to_str().unwrap(),
        "--supervisor",
        &fixture("supervisor.json"),
        "--out",
        dir.join("sas.json").to_str().unwrap(),
    ]);
    assert_eq!(code_of(&out), 2);
    assert_eq!(stdout_of(&out), "not attackable\n");
    assert!(!dir.join("sas.json").exists());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn simulate_reports_steps_and_verdict() {
    let dir = scratch_dir("simulate");
    let sas_path = dir.join("sas.json");
    let synth = covert(&[
        "synthesize",
        "--plant",
        &fixture("plant.json"),
        "--supervisor",
        &fixture("supervisor.json"),
        "--out",
        sas_path.to_str().unwrap(),
    ]);
    assert_eq!(code_of(&synth), 0);

    let out = covert(&[
        "simulate",
        "--plant",
        &fixture("plant.json"),
        "--supervisor",
        &fixture("supervisor.json"),
        "--sas",
        sas_path.to_str().unwrap(),
        "--run",
        "b,c",
    ]);
    assert_eq!(code_of(&out), 0, "stderr: {:?}", String::from_utf8_lossy(&out.stderr));
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].contains("event=b"));
    assert!(lines[0].contains("action=erase"));
    assert!(lines[0].contains("doctored=\u{03b5}"));
    assert!(lines[0].contains("stealthy=true"));
    assert!(lines[1].contains("event=c"));
    assert!(lines[1].contains("attacker initial estimate={1}"));
    assert!(lines[2].contains("attack undetected"));
    assert!(lines[2].contains("secret initial state revealed"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn oracle_agrees_with_structure() {
    let out = covert(&[
        "oracle",
        "--plant",
        &fixture("plant.json"),
        "--supervisor",
        &fixture("supervisor.json"),
    ]);
    assert_eq!(code_of(&out), 0);
    let text = stdout_of(&out);
    assert!(text.contains("oracle: attackable (witness: b c)"));
    assert!(text.contains("structure: attackable"));
    assert!(text.contains("agreement: true"));
}

#[test]
fn export_dot_renders_structures() {
    let dir = scratch_dir("dot");
    let aas_path = dir.join("aas.json");
    let build = covert(&[
        "build-aas",
        "--plant",
        &fixture("plant.json"),
        "--supervisor",
        &fixture("supervisor.json"),
        "--out",
        aas_path.to_str().unwrap(),
    ]);
    assert_eq!(code_of(&build), 0);
    let out = covert(&["export-dot", "--input", aas_path.to_str().unwrap()]);
    assert_eq!(code_of(&out), 0);
    let dot = stdout_of(&out);
    assert!(dot.starts_with("digraph aas {"));
    assert!(dot.contains("shape=box"));
    assert!(dot.contains("shape=circle"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn missing_file_exits_1() {
    let out = covert(&[
        "estimate",
        "--plant",
        "/nonexistent/plant.json",
        "--supervisor",
        &fixture("supervisor.json"),
        "--obs",
        "b",
    ]);
    assert_eq!(code_of(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn criterion_6_byte_identical_reruns() {
    let dir = scratch_dir("determinism");
    let runs: Vec<Vec<String>> = vec![
        vec![
            "validate".into(),
            fixture("plant.json"),
            "--supervisor".into(),
            fixture("supervisor.json"),
        ],
        vec![
            "estimate".into(),
            "--plant".into(),
            fixture("plant.json"),
            "--supervisor".into(),
            fixture("supervisor.json"),
            "--obs".into(),
            "b c".into(),
        ],
        vec![
            "check-opacity".into(),
            "--plant".into(),
            fixture("plant.json"),
            "--supervisor".into(),
            fixture("supervisor_permissive.json"),
        ],
        vec![
            "build-aas".into(),
            "--plant".into(),
            fixture("plant.json"),
            "--supervisor".into(),
            fixture("supervisor.json"),
            "--out".into(),
            dir.join("aas.json").display().to_string(),
            "--dot".into(),
            dir.join("aas.dot").display().to_string(),
        ],
        vec![
            "simplify".into(),
            "--plant".into(),
            fixture("plant.json"),
            "--supervisor".into(),
            fixture("supervisor.json"),
            "--out".into(),
            dir.join("saas.json").display().to_string(),
        ],
        vec![
            "synthesize".into(),
            "--plant".into(),
            fixture("plant.json"),
            "--supervisor".into(),
            fixture("supervisor.json"),
            "--out".into(),
            dir.join("sas.json").display().to_string(),
            "--dot".into(),
            dir.join("sas.dot").display().to_string(),
        ],
        vec![
            "oracle".into(),
            "--plant".into(),
            fixture("plant.json"),
            "--supervisor".into(),
            fixture("supervisor.json"),
        ],
    ];
    for args in &runs {
        let argv: Vec<&str> = args.iter().map(String::as_str).collect();
        let first = covert(&argv);
        let first_files = read_outputs(&dir);
        let second = covert(&argv);
        let second_files = read_outputs(&dir);
        assert_eq!(
            first.stdout, second.stdout,
            "stdout differs between runs of {args:?}"
        );
        assert_eq!(code_of(&first), code_of(&second));
        assert_eq!(
            first_files, second_files,
            "output files differ between runs of {args:?}"
        );
    }
    // and the simulate command over a written structure
    let simulate: Vec<String> = vec![
        "simulate".into(),
        "--plant".into(),
        fixture("plant.json"),
        "--supervisor".into(),
        fixture("supervisor.json"),
        "--sas".into(),
        dir.join("sas.json").display().to_string(),
        "--run".into(),
        "b,c".into(),
    ];
    let argv: Vec<&str> = simulate.iter().map(String::as_str).collect();
    assert_eq!(covert(&argv).stdout, covert(&argv).stdout);
    println!("criterion 6 (byte-identical CLI reruns): PASS");
    std::fs::remove_dir_all(&dir).ok();
}

fn read_outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut entries: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|entry| {
            let entry = entry.unwrap();
            (
                entry.file_name().to_string_lossy().to_string(),
                std::fs::read(entry.path()).unwrap(),
            )
        })
        .collect();
    entries.sort();
    entries
}
