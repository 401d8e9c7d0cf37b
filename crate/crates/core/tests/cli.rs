use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use weqsim::sweeps::{config_from_provenance, Command as Scenario};

fn weqsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weqsim")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("weqsim-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn config_file_then_overrides() {
    let cfg = scratch("prob.cfg");
    fs::write(&cfg, "# small grid\nmasses = 10 100\nalphas = 0 1\nepsilon = 2e-3\n").unwrap();
    let out = scratch("prob.csv");
    let o = weqsim(&[
        "prob-sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "alphas=0.5",
        "--out",
        out.to_str().unwrap(),
        "--no-timestamp",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let text = fs::read_to_string(&out).unwrap();
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "alpha,mass_amu,epsilon_cm,P1,P2");
    assert_eq!(data.len(), 3);
    assert!(data[1..].iter().all(|l| l.starts_with("5e-1,") && l.contains(",2e-3,")));

    let recovered = config_from_provenance(&text).unwrap();
    let expected = Scenario::ProbSweep.preset().merged("masses = 10 100\nalphas = 0.5\nepsilon = 2e-3").unwrap();
    assert_eq!(recovered, expected);
}

#[test]
fn exit_codes() {
    assert_eq!(weqsim(&["tables", "--verify", "--no-timestamp"]).status.code(), Some(0));
    let failed = weqsim(&["tables", "--verify", "--set", "u=999"]);
    assert_eq!(failed.status.code(), Some(4));
    let report = String::from_utf8_lossy(&failed.stderr);
    assert!(report.lines().any(|l| l.contains("table_alpha alpha=0.5 mean_z_cm") && l.ends_with("FAIL")));
    // the tables are still written
    assert!(String::from_utf8_lossy(&failed.stdout).contains("# verify: FAIL"));

    assert_eq!(weqsim(&["density", "--set", "alpha=1.5"]).status.code(), Some(2));
    assert_eq!(weqsim(&["density", "--set", "colour=blue"]).status.code(), Some(2));
    assert_eq!(weqsim(&["density", "--set", "novalue"]).status.code(), Some(2));
    assert_eq!(weqsim(&["density", "--config", "/nonexistent/weqsim.cfg"]).status.code(), Some(2));
    assert_eq!(weqsim(&["tau-sweep", "--set", "u=10"]).status.code(), Some(2));
    assert_eq!(weqsim(&["wigner", "--verify"]).status.code(), Some(2));
    // a start on the far tail of the density is a numerical failure
    assert_eq!(weqsim(&["trajectories", "--set", "offsets=0 500"]).status.code(), Some(3));
}

#[test]
fn bad_config_line_reports_line_number() {
    let cfg = scratch("broken.cfg");
    fs::write(&cfg, "alpha = 0.5\nthis line has no equals sign\n").unwrap();
    let o = weqsim(&["density", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn every_command_runs_and_is_repeatable() {
    let small: &[(&str, &[&str])] = &[
        ("density", &["--set", "z_points=21"]),
        ("width-sweep", &["--set", "alphas=0 1", "--set", "masses=10 100"]),
        ("prob-sweep", &["--set", "masses=10 100"]),
        ("tau-sweep", &["--set", "masses=10 100"]),
        ("tables", &[]),
        ("trajectories", &["--set", "samples=5"]),
        ("wigner", &["--set", "z_points=5", "--set", "p_points=9"]),
        ("peak-track", &["--set", "times=0 1"]),
    ];
    for (cmd, extra) in small {
        let mut args = vec![*cmd, "--no-timestamp"];
        args.extend_from_slice(extra);
        let a = weqsim(&[args.as_slice(), &["--jobs", "1"]].concat());
        let b = weqsim(&[args.as_slice(), &["--jobs", "2"]].concat());
        assert_eq!(a.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{cmd}");
        let text = String::from_utf8(a.stdout).unwrap();
        assert!(text.starts_with(&format!("# weqsim {} {cmd}\n", env!("CARGO_PKG_VERSION"))));
        // rectangular data blocks
        let mut width = None;
        for line in text.lines() {
            if line.starts_with("# table: ") {
                width = None;
            } else if !line.starts_with('#') {
                let n = line.split(',').count();
                assert_eq!(*width.get_or_insert(n), n, "{cmd}: {line}");
            }
        }
    }
}
