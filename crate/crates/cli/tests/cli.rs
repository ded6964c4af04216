use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_newton-socle"));
    c.env_remove("NEWTON_SOCLE_SEED");
    c
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(c: &mut Command) -> (i32, String, String) {
    let Output { status, stdout, stderr } = c.output().unwrap();
    (status.code().unwrap(), String::from_utf8(stdout).unwrap(), String::from_utf8(stderr).unwrap())
}

#[test]
fn verify_all_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.txt", "x1^2 + x2^3\n");
    let outs: Vec<PathBuf> = (0..2).map(|i| dir.path().join(format!("r{i}.json"))).collect();
    for out in &outs {
        let (code, _, err) = run(bin().args(["verify-all", "--seed", "7", "--poly"]).arg(&f).arg("--out").arg(out));
        assert_eq!(code, 0, "{err}");
    }
    let a = std::fs::read(&outs[0]).unwrap();
    assert_eq!(a, std::fs::read(&outs[1]).unwrap());
    let v: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["status"], "pass");
    assert_eq!(v["socle_order"]["nu_socle"], "7/6");
}

#[test]
fn text_summary_carries_the_newton_order_line() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.txt", "x1^2 + x2^3");
    let (code, text, _) = run(bin().args(["--format", "text", "verify-all", "--poly"]).arg(&f));
    assert_eq!(code, 0);
    let (_, json, _) = run(bin().args(["verify-all", "--poly"]).arg(&f));
    let v: Value = serde_json::from_str(&json).unwrap();
    assert!(text.contains(v["n_minus_nu_line"].as_str().unwrap()));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let degenerate = write(dir.path(), "d.txt", "x1^2 + 2*x1*x2 + x2^2");
    let (code, out, _) = run(bin().args(["verify-all", "--poly"]).arg(&degenerate));
    assert_eq!(code, 1);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["fan"].is_null());
    assert_eq!(v["nondegeneracy"]["nondegenerate"], false);

    let bad = write(dir.path(), "bad.txt", "x1^^2 + 3");
    assert_eq!(run(bin().args(["verify-all", "--poly"]).arg(&bad)).0, 2);
    assert_eq!(run(bin().args(["verify-all", "--poly", "/nonexistent/poly.txt"])).0, 2);

    let f = write(dir.path(), "f.txt", "x1^2 + x2^3");
    assert_eq!(run(bin().args(["--format", "yaml", "polyhedron", "--poly"]).arg(&f)).0, 2);
    assert_eq!(run(bin().args(["socle-order", "--trunc", "1", "--poly"]).arg(&f)).0, 2);

    // a fixed truncation too small to certify the ideal
    let (code, _, err) = run(bin().args(["socle-order", "--trunc", "2", "--poly"]).arg(&f));
    assert_eq!(code, 3, "{err}");
}

#[test]
fn seed_comes_from_the_environment_when_set() {
    let args = ["detlemma", "--rows", "2", "--cols", "3", "--trials", "5"];
    let (_, a, _) = run(bin().args(args).args(["--seed", "4"]));
    let (_, b, _) = run(bin().args(args).args(["--seed", "9"]).env("NEWTON_SOCLE_SEED", "4"));
    assert_eq!(a, b);
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["seed"], 4);
    assert_eq!(run(bin().args(args).env("NEWTON_SOCLE_SEED", "abc")).0, 2);
}

#[test]
fn residue_and_face_checks() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.txt", "x1*x2");
    let sys = write(dir.path(), "sys.json", r#"[{"nvars":2,"terms":[{"e":[2,0],"c":"2"}]}, "2*x2^2"]"#);
    let (code, out, err) = run(bin().arg("residue").arg("--g").arg(&g).arg("--system").arg(&sys));
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["value"], "1/4");

    let f = write(dir.path(), "f.txt", "x1^2 + x1*x2 + x2^3");
    let (_, out, _) = run(bin().args(["polyhedron", "--poly"]).arg(&f));
    let v: Value = serde_json::from_str(&out).unwrap();
    let faces = v["interior_compact_faces"].as_array().unwrap();
    let vertex = faces.iter().find(|x| x["dim"] == 0).unwrap()["index"].as_u64().unwrap().to_string();
    let one = write(dir.path(), "one.txt", "1");
    let (code, out, err) =
        run(bin().args(["verify-thm2", "--r", "1", "--face", &vertex, "--poly"]).arg(&f).arg("--h").arg(&one).arg("--vars").arg("2"));
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_ne!(v["value"], "0");
    let (code, out, _) = run(bin().args(["kbar", "--face", &vertex, "--poly"]).arg(&f));
    assert_eq!(code, 0);
    assert_eq!(serde_json::from_str::<Value>(&out).unwrap()["total_dim"], 1);
}
