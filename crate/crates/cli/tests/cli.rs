use std::path::Path;
use std::process::{Command, Output};

fn tilemul(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tilemul"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn census_of_the_four_by_four_window() {
    let o = tilemul(&["search", "--bound", "4", "--unsigned"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("top class E=1.087: 31 tiles"), "{text}");
    assert!(text.contains("E > 1: 553 tiles"), "{text}");
}

#[test]
fn solve_gen_verify_chain() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path());
    let o = tilemul(&["solve", "3x3", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("solution.json").exists());

    let o = tilemul(&["gen", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().any(|l| l.starts_with("5 LUTs:")), "{}", stdout(&o));
    for f in ["netlist.json", "plan.json", "mult_3x3.v", "mult_3x3.vhd", "tiling.svg"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }

    let o = tilemul(&["verify", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("pass"));

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    for cmd in ["solve", "gen", "verify"] {
        assert_eq!(manifest[cmd]["tool"], "tilemul", "{cmd}");
    }
    assert_eq!(manifest["solve"]["board"], "3x3");
}

#[test]
fn tampered_netlist_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path());
    assert_eq!(tilemul(&["gen", "4x4", "--out", out]).status.code(), Some(0));
    let file = dir.path().join("netlist.json");
    let mut nl: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    let lut = nl["nodes"]
        .as_array_mut()
        .unwrap()
        .iter_mut()
        .find(|n| n["kind"] == "lut")
        .unwrap();
    let init = u64::from_str_radix(lut["init"].as_str().unwrap(), 16).unwrap();
    lut["init"] = format!("{:016X}", !init).into();
    std::fs::write(&file, serde_json::to_string(&nl).unwrap()).unwrap();

    let o = tilemul(&["verify", "--netlist", path(&file)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"), "{}", stdout(&o));
}

#[test]
fn bad_input_exits_with_two() {
    for args in [
        &["solve", "0x3"][..],
        &["solve", "3x3", "--objective", "cheapest"],
        &["solve", "3x3", "--lib", "/no/such/library.json"],
        &["solve", "3x3", "--timeout", "-1"],
        &["frobnicate"],
    ] {
        let o = tilemul(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn artifacts_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = tilemul(&["gen", "7x5", "--nodes", "50000", "--out", path(d.path())]);
        assert_eq!(o.status.code(), Some(0));
    }
    for f in ["solution.json", "plan.json", "netlist.json", "mult_7x5.v", "mult_7x5.vhd", "tiling.svg", "manifest.json"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let from_config = dir.path().join("from-config");
    let from_flag = dir.path().join("from-flag");
    let cfg = dir.path().join("tilemul.toml");
    std::fs::write(
        &cfg,
        format!("out = {:?}\nnodes = 5000\nlib = \"rectangular\"\n", path(&from_config)),
    )
    .unwrap();

    let o = tilemul(&["--config", path(&cfg), "solve", "4x4"]);
    assert_eq!(o.status.code(), Some(0));
    let sol = std::fs::read_to_string(from_config.join("solution.json")).unwrap();
    assert!(sol.contains("rectangular"));

    let o = tilemul(&["--config", path(&cfg), "solve", "4x4", "--out", path(&from_flag), "--lib", "default"]);
    assert_eq!(o.status.code(), Some(0));
    let sol = std::fs::read_to_string(from_flag.join("solution.json")).unwrap();
    assert!(!sol.contains("\"library_version\": \"rectangular"));

    std::fs::write(&cfg, "colour = \"blue\"\n").unwrap();
    assert_eq!(tilemul(&["--config", path(&cfg), "solve", "3x3"]).status.code(), Some(2));
}

#[test]
fn table_shows_no_loss_against_rectangles() {
    let o = tilemul(&["table", "--max", "5", "--compare", "rectangular", "--nodes", "100000"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("objective A <= objective B on every board"), "{text}");
    // one row per board with w_y <= w_x <= 5
    assert_eq!(text.lines().filter(|l| l.contains('x') && !l.starts_with("A =")).count(), 15);
}

#[test]
fn lp_export_to_stdout() {
    let o = tilemul(&["export-lp", "2x2", "--lib", "rectangular"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("\\") || text.contains("Minimize"), "{text}");
    assert!(text.contains("Binary"));
    assert!(text.trim_end().ends_with("End"));
}
