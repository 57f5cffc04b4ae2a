use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fockcharge"));
    c.env_remove("FOCKCHARGE_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn passing_suite_exits_zero_with_provenance_line() {
    let o = run(&["oracle-equivalence", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let first = out.lines().next().unwrap();
    assert!(first.starts_with("# fockcharge oracle-equivalence seed=3 generated="), "{first}");
    assert!(out.lines().nth(1).unwrap().starts_with("instance,kind,modes,J,deviation"));
    assert!(stderr(&o).contains("fock_vs_trace_formula") && stderr(&o).contains("PASS"));
}

#[test]
fn no_timestamp_drops_the_comment() {
    let o = run(&["oracle-equivalence", "--no-timestamp"]);
    assert!(stdout(&o).starts_with("instance,"));
}

#[test]
fn experiment_flag_and_positional_agree() {
    let a = run(&["cbasis", "--no-timestamp"]);
    let b = run(&["--experiment", "cbasis", "--no-timestamp"]);
    assert_eq!(a.stdout, b.stdout);
    let o = run(&["cbasis", "--experiment", "spectrum"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn input_errors_exit_two() {
    for args in [
        &["nonsense"][..],
        &[][..],
        &["spectrum", "--seed", "x"],
        &["vacuum-divergence", "--shells", "1"],
        &["vacuum-divergence", "--cutoff", "3"],
        &["vacuum-divergence", "--m", "-2"],
        &["vacuum-divergence", "--order", "40"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(stderr(&o).contains("error:"));
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn unwritable_output_exits_one() {
    let path = scratch("missing-dir").join("nested").join("out.csv");
    let o = run(&["aligned", "--output", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("error:"));
}

#[test]
fn json_to_file_with_summary_on_stdout() {
    let path = scratch("weighted.json");
    let o = run(&["weighted", "--format", "json", "--output", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with('['));
    assert!(text.contains("\"instance\""));
    assert!(stdout(&o).contains("spectrum_error"));
}

#[test]
fn config_file_with_flag_override() {
    let path = scratch("spectrum.cfg");
    std::fs::write(&path, "# spectrum at seed 5\nexperiment = spectrum\nseed = 5\n").unwrap();
    let from_file = run(&["--config", path.to_str().unwrap(), "--no-timestamp"]);
    let direct = run(&["spectrum", "--seed", "5", "--no-timestamp"]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(from_file.stdout, direct.stdout);
    let overridden = run(&["--config", path.to_str().unwrap(), "--seed", "6", "--no-timestamp"]);
    assert_ne!(overridden.stdout, from_file.stdout);

    std::fs::write(&path, "experiment = spectrum\nwidth = 3\n").unwrap();
    assert_eq!(run(&["--config", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn thread_count_does_not_change_output() {
    let args = [
        "vacuum-divergence",
        "--shells",
        "2",
        "--cutoff",
        "12",
        "--panels",
        "1",
        "--order",
        "4",
        "--no-timestamp",
    ];
    let one = bin().args(args).args(["--threads", "1"]).output().unwrap();
    let three = bin().args(args).env("FOCKCHARGE_THREADS", "3").output().unwrap();
    assert_eq!(one.status.code(), Some(0), "{}", stderr(&one));
    assert_eq!(one.stdout, three.stdout);
    assert!(stdout(&one).starts_with("shell,K,J,S,deltaS,tail_estimate"));
    assert_eq!(bin().args(args).args(["--threads", "0"]).output().unwrap().status.code(), Some(2));
}
