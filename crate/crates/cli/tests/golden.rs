//! Reports on the shipped example must match the checked-in copies byte for
//! byte. Set `UPDATE_GOLDEN=1` to rewrite them after an intended change.

use std::path::{Path, PathBuf};
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_bracketlab");

fn manifest() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn bracketlab(args: &[&str]) -> String {
    let o = Command::new(BIN).args(args).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn check(name: &str, produced: &Path) {
    let golden = manifest().join("tests/golden").join(name);
    let got = std::fs::read(produced).unwrap();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(golden.parent().unwrap()).unwrap();
        std::fs::write(&golden, &got).unwrap();
        return;
    }
    let want = std::fs::read(&golden).unwrap_or_else(|e| panic!("{}: {e}", golden.display()));
    assert!(
        got == want,
        "{name} differs from {}:\n{}",
        golden.display(),
        String::from_utf8_lossy(&got)
    );
}

fn simulated(dir: &Path) -> PathBuf {
    let data = dir.join("example.csv");
    let cfg = manifest().join("examples/example.toml");
    bracketlab(&["simulate", "--config", cfg.to_str().unwrap(), "--out", data.to_str().unwrap()]);
    data
}

#[test]
fn example_reports_match_golden_files() {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("golden");
    std::fs::create_dir_all(&dir).unwrap();
    let data = simulated(&dir);
    check("example.csv", &data);
    for kind in ["means", "mwu", "kappa", "tobit"] {
        let prefix = dir.join(kind);
        bracketlab(&["estimate", kind, "--data", data.to_str().unwrap(), "--out", prefix.to_str().unwrap()]);
        check(&format!("{kind}.md"), &dir.join(format!("{kind}.md")));
        check(&format!("{kind}.csv"), &dir.join(format!("{kind}.csv")));
    }
    let verify = dir.join("verify.txt");
    std::fs::write(&verify, bracketlab(&["verify"])).unwrap();
    check("verify.txt", &verify);
}
