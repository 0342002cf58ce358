use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tcn_tools::io::read_tensor;
use tcn_tools::ToolError;

fn tcn(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tcn")).args(args).current_dir(cwd).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn hw() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../hw/gap8.json")
}

fn ok(args: &[&str], cwd: &Path) -> String {
    let out = tcn(args, cwd);
    assert_eq!(code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn identity_network_reproduces_its_input() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let hw = hw();
    let hw = hw.to_str().unwrap();
    ok(&["gen-net", "--kind", "identity", "-o", "nets"], d);
    ok(&["gen-input", "nets/identity.json", "--seed", "4", "-o", "x.tensor"], d);
    ok(&["plan", "nets/identity.json", hw, "-o", "p.json"], d);
    let text = ok(&["run", "nets/identity.json", hw, "p.json", "x.tensor", "-o", "y.tensor", "--check-oracle"], d);
    assert!(text.contains("oracle check: identical"));
    assert_eq!(read_tensor(&d.join("y.tensor")).unwrap(), read_tensor(&d.join("x.tensor")).unwrap());
    let csv = std::fs::read_to_string(d.join("y.tensor.report.csv")).unwrap();
    assert!(csv.starts_with("layer,kernel,tile_t,tile_cout,macs,pred_cycles,event_cycles,macs_per_cycle,l1_bytes\n"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let hw = hw();
    let hw = hw.to_str().unwrap();

    assert_eq!(code(&tcn(&["--help"], d)), 0);
    assert_eq!(code(&tcn(&["frobnicate"], d)), 1);
    assert_eq!(code(&tcn(&["plan", "missing.json", hw, "-o", "p.json"], d)), 1);

    ok(&["gen-net", "--kind", "lm", "--seed", "1", "-o", "nets"], d);
    let out = tcn(&["plan", "nets/lm.json", hw, "--force", "im2col", "-o", "p.json"], d);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("OOM") && err.contains("layer"), "{err}");
    assert!(!d.join("p.json").exists());
    assert_eq!(code(&tcn(&["plan", "nets/lm.json", hw, "--objective", "fastest", "-o", "p.json"], d)), 1);

    ok(&["gen-net", "--kind", "identity", "-o", "nets"], d);
    ok(&["gen-input", "nets/identity.json", "-o", "x.tensor"], d);
    ok(&["plan", "nets/identity.json", hw, "-o", "p.json"], d);
    let plan = std::fs::read_to_string(d.join("p.json")).unwrap();
    std::fs::write(d.join("bad.json"), plan.replace("\"tile_c_out\": 8", "\"tile_c_out\": 9")).unwrap();
    std::fs::write(d.join("junk.json"), &plan[..plan.len() / 2]).unwrap();
    for bad in ["bad.json", "junk.json"] {
        let out = tcn(&["run", "nets/identity.json", hw, bad, "x.tensor", "-o", "y.tensor"], d);
        assert_eq!(code(&out), 1, "{bad}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let args = ["run", "nets/identity.json", hw, "p.json", "x.tensor", "-o", "y.tensor", "--workers", "0"];
    assert_eq!(code(&tcn(&args, d)), 1);

    let out = tcn(&["calibrate", hw, "--lattice", "diagonal", "-o", "c.json"], d);
    assert_eq!(code(&out), 4);
    let out = tcn(&["sweep", hw, "--param", "d", "--range", "5:2", "-o", "s.csv"], d);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty"));

    assert_eq!(ToolError::OracleMismatch("x".into()).exit_code(), 3);
}

#[test]
fn calibrate_writes_the_default_constants() {
    let dir = tempfile::tempdir().unwrap();
    let hw = hw();
    ok(&["calibrate", hw.to_str().unwrap(), "-o", "c.json"], dir.path());
    assert_eq!(std::fs::read(dir.path().join("c.json")).unwrap(), std::fs::read(&hw).unwrap());
}

#[test]
fn sweep_writes_one_row_per_point_and_variant() {
    let dir = tempfile::tempdir().unwrap();
    let hw = hw();
    ok(&["sweep", hw.to_str().unwrap(), "--param", "k", "--range", "1:7:2", "--cin", "16", "-o", "s.csv"], dir.path());
    let csv = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "param,value,variant,macs,predicted_cycles,event_cycles,macs_per_cycle");
    assert_eq!(lines.count(), 4 * 3);
}
