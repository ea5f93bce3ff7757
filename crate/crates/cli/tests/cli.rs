use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn quditlearn(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_quditlearn"));
    cmd.args(args).env_remove("QUDITLEARN_SEED");
    cmd
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output {
        status,
        stdout,
        stderr,
    } = cmd.output().unwrap();
    (
        status.code().unwrap(),
        String::from_utf8(stdout).unwrap(),
        String::from_utf8(stderr).unwrap(),
    )
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn noiseless_learn_prints_the_secret() {
    let (code, out, _) = run(&mut quditlearn(&[
        "learn", "--q", "7", "--n", "2", "--secret", "3,5", "--seed", "1",
    ]));
    if code == 0 {
        assert_eq!(out.trim(), "s = [3, 5]");
    } else {
        assert_eq!((code, out.trim()), (1, "BOT"));
    }
}

#[test]
fn bad_modulus_is_a_usage_error() {
    let (code, _, err) = run(&mut quditlearn(&["learn", "--q", "4"]));
    assert_eq!(code, 2);
    assert!(err.starts_with("error:"), "{err}");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let (code, _, _) = run(&mut quditlearn(&["learn", "--bogus"]));
    assert_eq!(code, 2);
}

#[test]
fn flag_overrides_environment_seed() {
    let args = ["experiment", "--q", "5", "--n", "2", "--trials", "200"];
    let (_, from_env, _) = run(quditlearn(&args).env("QUDITLEARN_SEED", "11"));
    let (_, from_flag, _) = run(&mut quditlearn(&[&args[..], &["--seed", "11"]].concat()));
    let (_, both, _) =
        run(quditlearn(&[&args[..], &["--seed", "11"]].concat()).env("QUDITLEARN_SEED", "12"));
    let strip = |s: &str| {
        s.lines()
            .filter(|l| !l.starts_with("wall_time_ms"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert!(from_env.contains("seed = 11"));
    assert_eq!(strip(&from_env), strip(&from_flag));
    assert_eq!(strip(&both), strip(&from_flag));
}

#[test]
fn config_file_then_flags() {
    let path = scratch("experiment.toml");
    fs::write(
        &path,
        "problem = \"lwe\"\nq = 11\nn = 1\ntrials = 50\nseed = 3\n",
    )
    .unwrap();
    let (code, out, _) = run(&mut quditlearn(&[
        "experiment",
        "--config",
        path.to_str().unwrap(),
        "--q",
        "13",
    ]));
    assert_eq!(code, 0);
    assert!(
        out.contains("q = 13") && out.contains("trials = 50"),
        "{out}"
    );
}

#[test]
fn sweep_writes_csv_and_reports_failed_rows() {
    let config = scratch("sweep.toml");
    let csv = scratch("sweep.csv");
    fs::write(
        &config,
        "trials = 40\nseed = 9\n\n[[run]]\nq = 5\nn = 1\n\n[[run]]\nq = 9\n\n[[run]]\nproblem = \"sis\"\nq = 7\nn = 2\nL = 2\n",
    )
    .unwrap();
    let (code, _, err) = run(&mut quditlearn(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]));
    assert_eq!(code, 1);
    assert!(err.contains("run 2"), "{err}");
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], quditlearn::experiments::CSV_HEADER);
    assert!(lines[3].starts_with("sis,7,2,"), "{}", lines[3]);
}

#[test]
fn verify_passes_and_catches_fault() {
    let (code, out, _) = run(&mut quditlearn(&["verify", "--max-qn", "512"]));
    assert_eq!(code, 0, "{out}");
    let (code, _, err) = run(&mut quditlearn(&[
        "verify",
        "--max-qn",
        "512",
        "--inject-fault",
    ]));
    assert_eq!(code, 1);
    assert!(err.contains("norm-preservation"));
}
