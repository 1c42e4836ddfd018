use std::fs;
use std::path::Path;

use exadam_cli::{main_with, parse_args, CliError, Format, Verb};

const QUICK: &str = r#"
[problem]
kind = "logistic"
n = 120
d = 3

[optimizer]
kinds = ["exadam", "adam"]
alpha = 1e-2

[run]
epochs = 4
batch_size = 16
seed = 7
record_step_losses = true
"#;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("exadam").chain(args.iter().copied());
    let code = main_with(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("exp.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), QUICK);
    for (args, cause) in [
        (vec!["frobnicate"], "unknown verb"),
        (vec![], "unknown verb"),
        (vec!["run"], "missing config"),
        (
            vec!["run", "--config", "/no/such/file.toml"],
            "missing config",
        ),
        (vec!["run", "--config", &cfg, "--format", "xml"], "bad flag"),
        (vec!["run", "--config", &cfg, "--seed", "-3"], "bad flag"),
        (vec!["run", "--config", &cfg, "--bogus"], "bad flag"),
        (vec!["check", "--format", "md"], "bad flag"),
    ] {
        let (code, _, err) = run(&args);
        assert_eq!(code, 2, "{args:?}");
        assert!(err.starts_with("usage: exadam"), "{err}");
        let last = err.lines().last().unwrap();
        assert!(
            last.starts_with(&format!("error: {cause}")),
            "{args:?}: {last}"
        );
    }
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("export-goldens"));
    assert_eq!(parse_args(["exadam", "-h"]).unwrap_err().exit_code(), 0);
}

#[test]
fn defaults() {
    let cmd = parse_args(["exadam", "check"]).unwrap();
    assert_eq!(cmd.verb, Verb::Check);
    assert_eq!(cmd.output_dir, Path::new("."));
    assert_eq!(cmd.seed, None);
    assert!(matches!(
        parse_args(["exadam", "compare"]),
        Err(CliError::MissingConfig(_))
    ));
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), QUICK);
    let cmd = parse_args(["exadam", "compare", "--config", &cfg]).unwrap();
    assert_eq!(cmd.format, Format::Md);
}

#[test]
fn run_writes_one_trace_per_optimizer() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), QUICK);
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();
    let (code, stdout, err) = run(&["run", "--config", &cfg, "--out", out_s]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(stdout.lines().count(), 4);
    let csv = fs::read_to_string(out.join("exadam.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("epoch,train_loss"));
    let steps = fs::read_to_string(out.join("adam.steps.csv")).unwrap();
    // 108 training rows of 120 (90/10 split): 7 batches per epoch, the last short
    assert_eq!(steps.lines().count(), 1 + 4 * 7);
    let leftovers: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.contains(".tmp"))
        .collect();
    assert!(leftovers.is_empty(), "{leftovers:?}");
}

#[test]
fn seed_flag_changes_output_and_reruns_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), QUICK);
    let read = |sub: &str, seed: &str| {
        let out = dir.path().join(sub);
        let args = [
            "run",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "--seed",
            seed,
            "--format",
            "json",
        ];
        assert_eq!(run(&args).0, 0);
        fs::read_to_string(out.join("exadam.json")).unwrap()
    };
    let a = read("a", "1");
    assert_eq!(a, read("b", "1"));
    assert_ne!(a, read("c", "2"));
    assert!(a.contains("\"seed\": 1"));
}

#[test]
fn compare_writes_report_in_each_format() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), QUICK);
    let out = dir.path().to_str().unwrap();
    for (fmt, needle) in [
        ("md", "| EXAdam | 1 |"),
        ("json", "\"status\""),
        ("csv", "optimizer,"),
    ] {
        let (code, _, err) = run(&["compare", "--config", &cfg, "--out", out, "--format", fmt]);
        assert_eq!(code, 0, "{err}");
        let text = fs::read_to_string(dir.path().join(format!("report.{fmt}"))).unwrap();
        assert!(text.contains(needle), "{fmt}: {text}");
    }
}

#[test]
fn diverging_sweep_exits_one_but_still_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
[problem]
kind = "rosenbrock"

[optimizer]
kinds = ["exadam", "sgd-momentum"]
alpha = 1e-4

[optimizer.sgd-momentum]
alpha = 1.0

[run]
epochs = 50
seed = 1
"#,
    );
    let out = dir.path().to_str().unwrap();
    let (code, stdout, _) = run(&["compare", "--config", &cfg, "--out", out]);
    assert_eq!(code, 1);
    assert!(stdout.contains("diverged"));
    let md = fs::read_to_string(dir.path().join("report.md")).unwrap();
    assert!(md.contains("diverged"), "{md}");
}

#[test]
fn invalid_config_contents_are_runtime_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[problem]\nkind = \"mlp\"\n");
    let (code, _, err) = run(&[
        "run",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error: "), "{err}");
}

#[test]
fn exported_goldens_check_clean() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, _, err) = run(&["export-goldens", "--out", out]);
    assert_eq!(code, 0, "{err}");
    let path = dir.path().join("single_step.json");
    let (code, stdout, _) = run(&["check", "--config", path.to_str().unwrap()]);
    assert!(stdout.contains("PASS goldens/supplied"), "{stdout}");
    assert_eq!(code, 0, "{stdout}");

    let tampered =
        fs::read_to_string(&path)
            .unwrap()
            .replacen("\"theta\": [", "\"theta\": [1.5, ", 1);
    fs::write(&path, tampered).unwrap();
    let (code, stdout, err) = run(&["check", "--config", path.to_str().unwrap()]);
    assert_eq!(code, 1, "{stdout}{err}");
}
