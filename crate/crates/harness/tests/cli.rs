mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::{small_config, write_config};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pointer-collapse")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn config_file(dir: &Path, f: impl FnOnce(&mut pointer_collapse::RunConfig)) -> String {
    let mut c = small_config(&dir.join("out"));
    f(&mut c);
    let p = dir.join("config.json");
    write_config(&c, &p);
    p.to_string_lossy().into_owned()
}

#[test]
fn completed_run_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config_file(tmp.path(), |_| {});
    let o = cli(&["beable", "--config", &cfg, "--paths", "4", "--region", "-1,0,6e-4,1.2e-3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("wrote "));
    assert_eq!(std::fs::read_dir(tmp.path().join("out")).unwrap().count(), 3);
}

#[test]
fn failed_check_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config_file(tmp.path(), |c| c.collapse.lambda = 0.0);
    let o = cli(&["figure2", "--config", &cfg]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn usage_and_input_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config_file(tmp.path(), |_| {});

    let outside = cli(&["beable", "--config", &cfg, "--region", "-9,0,0,1e-4"]);
    assert_eq!(code(&outside), 2);
    assert!(String::from_utf8_lossy(&outside.stderr).contains("leaves the lattice"));

    let missing = cli(&["figure2", "--config", &tmp.path().join("nope.json").to_string_lossy()]);
    assert_eq!(code(&missing), 2);

    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, r#"{"seed": 1, "lattice": {"sites": 4}}"#).unwrap();
    assert_eq!(code(&cli(&["figure2", "--config", &bad.to_string_lossy()])), 2);

    let three = config_file(tmp.path(), |c| {
        let b = c.experiment.as_ref().unwrap().branches[0].clone();
        c.experiment.as_mut().unwrap().branches.push(b);
    });
    assert_eq!(code(&cli(&["figure2", "--config", &three])), 2);

    assert_eq!(code(&cli(&["no-such-command"])), 2);
}

#[test]
fn seed_flag_changes_the_file_names() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config_file(tmp.path(), |_| {});
    for seed in ["1", "2"] {
        let o = cli(&["figure2", "--config", &cfg, "--seed", seed, "--paths", "3"]);
        assert!(matches!(code(&o), 0 | 1));
    }
    let mut names: Vec<String> = std::fs::read_dir(tmp.path().join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(names.len(), 8);
    assert!(names.iter().filter(|n| n.starts_with("figure2_paths_")).count() == 2);
}
