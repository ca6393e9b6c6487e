use std::process::{Command, Output};

fn rido(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rido")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn schedule_prints_the_dcs() {
    let o = rido(&["schedule", "--strategy", "robust", "--lambda", "10", "--gamma", "0.5", "--horizon", "2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "8,2\n");
    let o = rido(&["schedule", "--strategy", "uniform", "--lambda", "10", "--gamma", "0.5", "--horizon", "5"]);
    assert_eq!(stdout(&o), "2,2,2,2,2\n");
}

#[test]
fn oracle_uses_enumeration_on_small_instances() {
    let o = rido(&["oracle", "--env", "first-step-chain", "--lambda", "6", "--gamma", "1", "--horizon", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("method brute-force"));
    assert!(text.contains("dcs 4,1,1"));

    let o = rido(&["oracle", "--env", "terminal-chain", "--lambda", "100", "--gamma", "1"]);
    assert!(stdout(&o).contains("method relaxed"));
    assert!(stdout(&o).contains("dcs 10,10,10,10,10,10,10,10,10,10"));

    let o = rido(&["oracle", "--env", "navigation", "--lambda", "1300", "--gamma", "0.9"]);
    assert!(!o.status.success());
}

#[test]
fn run_writes_one_csv_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let o = rido(&[
        "run", "--env", "lqg", "--strategy", "rido", "--lambda", "2000", "--gamma", "0.9", "--batch", "200",
        "--runs", "8", "--seed", "3", "--horizon", "10", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "env,strategy,lambda,gamma,T,b,beta,runs,mse,ci95,seconds");
    assert!(lines[1].starts_with("lqg,rido,2000,0.9,10,200,1.0,8,"));
    assert_eq!(lines.len(), 2);
}

#[test]
fn trace_dumps_one_row_per_phase() {
    let o = rido(&["trace", "--env", "first-step-chain", "--lambda", "1000", "--batch", "200", "--seed", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "phase,t0,t1,t2,t3,t4,t5,t6,t7,t8,t9");
    assert_eq!(lines[1], "0,20,20,20,20,20,20,20,20,20,20");
    assert_eq!(lines.len(), 6);
}

#[test]
fn config_errors_exit_nonzero() {
    // Batch not a multiple of the horizon.
    let o = rido(&["run", "--env", "terminal-chain", "--strategy", "rido", "--lambda", "1000", "--gamma", "1", "--batch", "25"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("batch"));
    // No robust schedule without discounting.
    let o = rido(&["schedule", "--strategy", "robust", "--lambda", "100", "--gamma", "1", "--horizon", "5"]);
    assert!(!o.status.success());
    let o = rido(&["run", "--env", "mountain", "--strategy", "uniform", "--lambda", "10", "--gamma", "1"]);
    assert!(!o.status.success());

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "seed = 1\n[[experiment]]\nenv = \"lqg\"\nstrategies = [\"rido\"]\nlambdas = [999]\ngammas = [0.9]\nbatch = 100\n").unwrap();
    let o = rido(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(o.stdout.is_empty());
}
