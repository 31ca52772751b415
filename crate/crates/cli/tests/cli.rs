use std::path::Path;
use std::process::Command;

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Outcome {
    fn last_error_line(&self) -> &str {
        self.stderr.lines().last().unwrap_or("")
    }
}

fn jetsim(dir: &Path, args: &[&str]) -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_jetsim"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("run jetsim");
    Outcome {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn generated(args: &[&str]) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let mut full = vec!["generate", "--duration", "6", "--horizon", "1"];
    full.extend_from_slice(args);
    let out = jetsim(dir.path(), &full);
    assert_eq!(out.code, 0, "{}", out.stderr);
    dir
}

#[test]
fn generate_reports_lag_and_suggestions() {
    let dir = generated(&[]);
    let out = jetsim(dir.path(), &["generate", "--duration", "6", "--horizon", "1"]);
    assert!(out.stdout.contains("lag=2"));
    assert!(out.stdout.contains("suggested order=2 shifts=9"));
    for f in ["model.txt", "data.csv", "jet.csv", "target_jet.csv", "truth.csv", "problem.txt"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
}

#[test]
fn zero_states_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = jetsim(dir.path(), &["generate", "--n", "0"]);
    assert_eq!(out.code, 2);
    assert_eq!(out.last_error_line(), "ERROR code=2 kind=validation");
}

#[test]
fn missing_output_directory_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = jetsim(dir.path(), &["generate", "--out-dir", "no/such/dir"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("no/such/dir"));
}

#[test]
fn informative_and_constant_datasets() {
    let dir = generated(&[]);
    let ok = jetsim(dir.path(), &["check", "--config", "problem.txt", "--report", "inf.csv"]);
    assert_eq!(ok.code, 0, "{}", ok.stderr);
    assert!(ok.stdout.starts_with("verdict=informative"));
    let report = std::fs::read_to_string(dir.path().join("inf.csv")).unwrap();
    assert!(report.starts_with("t,rank,"));

    let constant = generated(&["--input", "constant"]);
    let out = jetsim(constant.path(), &["check", "--config", "problem.txt"]);
    assert_eq!(out.code, 3);
    assert!(out.stdout.contains("verdict=not_informative"));
    assert_eq!(out.last_error_line(), "ERROR code=3 kind=not_informative");

    let gated = jetsim(constant.path(), &["simulate", "--config", "problem.txt"]);
    assert_eq!(gated.code, 3);
}

#[test]
fn malformed_csv_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("data.csv"), "t,u1,y1\n0,1,2\n1e-3,1\n2e-3,1,2\n").unwrap();
    let out = jetsim(dir.path(), &["check", "--data", "data.csv", "--n", "2", "--order", "2", "--period", "0.3"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("line 3"), "{}", out.stderr);
    assert_eq!(out.last_error_line(), "ERROR code=2 kind=parse");

    std::fs::write(dir.path().join("data.csv"), "t,u1,y1\n0,1,2\n1e-3,1,oops\n").unwrap();
    let out = jetsim(dir.path(), &["check", "--data", "data.csv", "--n", "2", "--order", "2", "--period", "0.3"]);
    assert!(out.stderr.contains("line 3"), "{}", out.stderr);
}

#[test]
fn estimated_jets_from_raw_data_are_informative() {
    let dir = generated(&[]);
    let cfg = std::fs::read_to_string(dir.path().join("problem.txt")).unwrap();
    let raw_cfg: String = cfg
        .lines()
        .filter(|l| !l.starts_with("jet ="))
        .map(|l| format!("{l}\n"))
        .collect::<String>()
        + "data = data.csv\n";
    std::fs::write(dir.path().join("raw.txt"), raw_cfg).unwrap();
    let out = jetsim(dir.path(), &["check", "--config", "raw.txt"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
}

#[test]
fn simulation_matches_truth_and_compares_cleanly() {
    let dir = generated(&[]);
    let sim = jetsim(dir.path(), &["simulate", "--config", "problem.txt", "--plot", "plot.svg"]);
    assert_eq!(sim.code, 0, "{}", sim.stderr);
    let rel: f64 = sim
        .stdout
        .lines()
        .find_map(|l| l.strip_prefix("rel_sup_error="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(rel < 1e-3, "{rel}");
    let svg = std::fs::read_to_string(dir.path().join("plot.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);

    let cmp = jetsim(dir.path(), &["compare", "--result", "result.csv", "--truth", "truth.csv"]);
    assert_eq!(cmp.code, 0, "{}", cmp.stderr);
    assert!(cmp.stdout.contains("channel=1 "));

    let same = jetsim(dir.path(), &["compare", "--result", "truth.csv", "--truth", "truth.csv"]);
    assert_eq!(same.code, 0);
    assert!(same.stdout.contains("sup_abs=0e0 sup_rel=0e0 rms_rel=0e0"), "{}", same.stdout);
}

#[test]
fn compare_rejects_mismatched_channel_counts() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("a.csv"), "t,y1\n0,1\n1e-3,2\n").unwrap();
    std::fs::write(dir.path().join("b.csv"), "t,y1,y2\n0,1,1\n1e-3,2,2\n").unwrap();
    let out = jetsim(dir.path(), &["compare", "--result", "a.csv", "--truth", "b.csv"]);
    assert_eq!(out.code, 2);
    assert_eq!(out.last_error_line(), "ERROR code=2 kind=validation");
}

#[test]
fn horizon_beyond_the_window_fails_before_computing() {
    let dir = generated(&[]);
    let out = jetsim(dir.path(), &["simulate", "--config", "problem.txt", "--horizon", "50"]);
    assert_eq!(out.code, 2);
    assert!(!dir.path().join("result.csv").exists());
}

#[test]
fn rank_deficient_data_needs_the_implicit_mode() {
    // One order above the lag: the coefficient matrix has more rows than rank.
    let dir = generated(&["--order", "3"]);
    let explicit = jetsim(dir.path(), &["simulate", "--config", "problem.txt"]);
    assert_eq!(explicit.code, 5, "{}", explicit.stderr);
    assert!(explicit.stderr.contains("implicit_lsq"));
    assert_eq!(explicit.last_error_line(), "ERROR code=5 kind=rank_deficient");

    let implicit = jetsim(dir.path(), &["simulate", "--config", "problem.txt", "--mode", "implicit_lsq"]);
    assert_eq!(implicit.code, 0, "{}", implicit.stderr);
}

#[test]
fn inadmissible_initial_outputs_are_rejected() {
    // With a redundant order the stacked initial jet must lie in the behavior.
    let dir = generated(&["--order", "3"]);
    let out = jetsim(
        dir.path(),
        &["simulate", "--config", "problem.txt", "--mode", "implicit_lsq", "--y-init", "1;0;0;0"],
    );
    assert_eq!(out.code, 4, "{}", out.stderr);
    assert_eq!(out.last_error_line(), "ERROR code=4 kind=init_inconsistent");
}
