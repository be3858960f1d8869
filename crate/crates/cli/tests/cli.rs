//! End-to-end behaviors of the `okounkov` binary and the instance parser.

use okounkov_cli::instance::parse_instance;
use okounkov_core::{dyadic_curve, Flag, Scalar};
use std::path::{Path, PathBuf};
use std::process::Command;

fn instances_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../instances")
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_okounkov"))
}

fn temp_out(tag: &str) -> PathBuf {
    std::env::temp_dir().join(format!("okounkov-cli-test-{}-{tag}", std::process::id()))
}

#[test]
fn instance_file_matches_constructor() {
    let parsed = parse_instance(&instances_dir().join("dyadic.inst")).unwrap();
    let built = dyadic_curve(Scalar::ratio(1, 2), 256).unwrap();
    for m in 0..=32u32 {
        assert_eq!(
            parsed.model.graded_piece(m).unwrap().dimension(),
            built.graded_piece(m).unwrap().dimension(),
            "degree {m}"
        );
    }
    assert_eq!(parsed.flag, Some(Flag::at_point(Scalar::zero())));
}

#[test]
fn named_slice_rule_parses() {
    let parsed = parse_instance(&instances_dir().join("parity.inst")).unwrap();
    assert_eq!(parsed.model.graded_piece(5).unwrap().dimension(), 1);
    assert_eq!(parsed.model.graded_piece(6).unwrap().dimension(), 7);
}

#[test]
fn rescale_and_generated_imports() {
    let rescaled = parse_instance(&instances_dir().join("rescale2.inst")).unwrap();
    // degree-n piece of the rescale is the degree-2n piece of the base
    assert_eq!(rescaled.model.graded_piece(2).unwrap().dimension(), 4);
    let gensub = parse_instance(&instances_dir().join("gensub.inst")).unwrap();
    assert_eq!(gensub.model.graded_piece(3).unwrap().dimension(), 4);
}

#[test]
fn duplicate_point_rejected() {
    let path = temp_out("dup").with_extension("inst");
    std::fs::write(
        &path,
        "kind = curve\npoints = [1, 1]\ncoeffs = [1, 1/2]\ntruncation = 8\n",
    )
    .unwrap();
    let err = parse_instance(&path).unwrap_err().to_string();
    assert!(err.contains("duplicate support point"), "{err}");
    std::fs::remove_file(&path).ok();
}

#[test]
fn unknown_key_rejected_with_line_number() {
    let path = temp_out("key").with_extension("inst");
    std::fs::write(
        &path,
        "kind = curve\npoints = [1]\ncoeffs = [1]\nwibble = 2\ntruncation = 8\n",
    )
    .unwrap();
    let err = parse_instance(&path).unwrap_err().to_string();
    assert!(err.contains(":4:") && err.contains("wibble"), "{err}");
    std::fs::remove_file(&path).ok();
}

#[test]
fn flag_on_support_point_rejected() {
    let path = temp_out("flag").with_extension("inst");
    std::fs::write(
        &path,
        "kind = curve\npoints = [1]\ncoeffs = [1]\ntruncation = 8\nflag = point(1)\n",
    )
    .unwrap();
    let err = parse_instance(&path).unwrap_err().to_string();
    assert!(err.contains("support"), "{err}");
    std::fs::remove_file(&path).ok();
}

#[test]
fn exit_codes() {
    // 0: clean analysis
    let out = temp_out("ok");
    let status = bin()
        .args([
            "divisor",
            "--instance",
            instances_dir().join("line.inst").to_str().unwrap(),
            "--M",
            "8",
            "--out",
            out.to_str().unwrap(),
        ])
        .stdout(std::process::Stdio::null())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    std::fs::remove_dir_all(&out).ok();

    // 1: violated verdict under --expect-approximable
    let out = temp_out("violated");
    let status = bin()
        .args([
            "cond3",
            "--instance",
            instances_dir().join("parity.inst").to_str().unwrap(),
            "--P",
            "5,9",
            "--N",
            "8",
            "--expect-approximable",
            "--out",
            out.to_str().unwrap(),
        ])
        .stdout(std::process::Stdio::null())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    let verdict = std::fs::read_to_string(out.join("cond3_verdict.txt")).unwrap();
    assert!(verdict.starts_with("verdict: Violated"), "{verdict}");
    std::fs::remove_dir_all(&out).ok();

    // 2: parse errors
    let status = bin()
        .args(["validate", "--instance", "/nonexistent.inst"])
        .stderr(std::process::Stdio::null())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn env_var_sets_default_output_directory() {
    let out = temp_out("envout");
    std::fs::remove_dir_all(&out).ok();
    let status = bin()
        .args([
            "validate",
            "--instance",
            instances_dir().join("line.inst").to_str().unwrap(),
        ])
        .env("OKOUNKOV_OUT", &out)
        .current_dir(std::env::temp_dir())
        .stdout(std::process::Stdio::null())
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("validate.csv").exists());
    std::fs::remove_dir_all(&out).ok();
}

#[test]
fn csv_decimals_re_render_from_fractions() {
    let out = temp_out("csv");
    let status = bin()
        .args([
            "ranks",
            "--instance",
            instances_dir().join("dyadic.inst").to_str().unwrap(),
            "--M",
            "24",
            "--out",
            out.to_str().unwrap(),
        ])
        .stdout(std::process::Stdio::null())
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(out.join("volume_sequence.csv")).unwrap();
    let mut rows = 0;
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 4);
        let frac: Scalar = cells[2].parse().unwrap();
        assert_eq!(frac.to_decimal(12), cells[3], "row {line}");
        rows += 1;
    }
    assert_eq!(rows, 24);
    assert!(text.ends_with('\n') && !text.contains('\r'));
    std::fs::remove_dir_all(&out).ok();
}

#[test]
fn shipped_instances_validate_cleanly() {
    // every shipped instance except the parity non-example passes the
    // full validation (unit piece, sampled closure, nonemptiness)
    for file in [
        "line.inst",
        "dyadic.inst",
        "triangle.inst",
        "gensub.inst",
        "invsquares.inst",
        "harmonic.inst",
        "rescale2.inst",
    ] {
        let inst = parse_instance(&instances_dir().join(file)).unwrap();
        let report = okounkov_core::validate_model(&inst.model, 16, 5).unwrap();
        assert!(report.passed(), "{file} failed validation");
    }
}

#[test]
fn permuted_coordinate_flag_parses() {
    let path = temp_out("permflag").with_extension("inst");
    std::fs::write(
        &path,
        "kind = monomial\nslice = polytope([[0, 0], [1, 0], [0, 1]])\ntruncation = 8\n\
         flag = coordinate([0, 0], order=[2, 1])\n",
    )
    .unwrap();
    let parsed = parse_instance(&path).unwrap();
    assert_eq!(
        parsed.flag,
        Some(Flag::Coordinate {
            order: vec![1, 0],
            center: vec![Scalar::zero(), Scalar::zero()],
        })
    );
    std::fs::remove_file(&path).ok();
}

#[test]
fn validate_reports_parity_closure_findings() {
    let out = temp_out("parity-validate");
    let status = bin()
        .args([
            "validate",
            "--instance",
            instances_dir().join("parity.inst").to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .stdout(std::process::Stdio::null())
        .status()
        .unwrap();
    // mixed-parity closure genuinely fails: findings, exit 1
    assert_eq!(status.code(), Some(1));
    let csv = std::fs::read_to_string(out.join("validate.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("closure") && l.contains("fail")));
    std::fs::remove_dir_all(&out).ok();
}
