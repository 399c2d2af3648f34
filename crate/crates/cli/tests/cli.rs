use std::process::{Command, Output};

fn wijsum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wijsum"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn identities_example_prints_residual() {
    let o = wijsum(&["identities", "--lambda", "n^2", "--horizon", "500", "--seed", "7"]);
    assert_eq!(code(&o), 0);
    let err = String::from_utf8_lossy(&o.stderr);
    let residual: f64 = err
        .split("max identity residual: ")
        .nth(1)
        .and_then(|s| s.split_whitespace().next())
        .and_then(|s| s.parse().ok())
        .expect("residual printed");
    assert!(residual < 1e-12);
}

#[test]
fn constant_scenario_succeeds() {
    assert_eq!(code(&wijsum(&["scenario", "--name", "constant"])), 0);
}

#[test]
fn input_errors_exit_2() {
    for args in [
        vec!["scenario", "--name", "no-such-scenario"],
        vec!["identities", "--lambda", "n^^2"],
        vec!["conditions", "--lambda", "3 - n"],
        vec!["transform", "--sequence", "cube(1)", "--probe", "0"],
        vec!["verdict", "--sequence", "point(1,0)", "--probe", "0,0", "--target", "point(1,0)", "--horizon", "99"],
        vec!["transform", "--trace", "/nonexistent/trace.csv"],
        vec!["density", "--sequence", "point(k)", "--probe", "0"],
        vec!["--eps", "0.1"],
        vec!["frobnicate"],
    ] {
        let o = wijsum(&args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn planted_counterexample_exits_1() {
    let o = wijsum(&["scenario", "--name", "sparse-spike", "--suite-lambda", "n"]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["report"]["counterexample_candidates"], 2);
}

#[test]
fn trace_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let gen = wijsum(&[
        "transform",
        "--sequence",
        "cycle: ball((1/k, 0), 1) | sphere((0, -1/k), 2)",
        "--target",
        "point(0,0)",
        "--probe",
        "0.5,-2",
        "--probe",
        "(-1/3, 0.7)",
        "--horizon",
        "300",
        "--mu",
        "n^3",
        "--out",
        a.to_str().unwrap(),
    ]);
    assert_eq!(code(&gen), 0);
    let again = wijsum(&["transform", "--trace", a.to_str().unwrap(), "--mu", "n^3", "--out", b.to_str().unwrap()]);
    assert_eq!(code(&again), 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    // the same trace drives identical verdicts either way
    let from_seq = wijsum(&[
        "verdict", "--sequence", "cycle: ball((1/k, 0), 1) | sphere((0, -1/k), 2)", "--target",
        "point(0,0)", "--probe", "0.5,-2", "--probe", "(-1/3, 0.7)", "--horizon", "300",
    ]);
    let from_csv = wijsum(&["verdict", "--trace", a.to_str().unwrap()]);
    let strip = |o: &Output| {
        let mut v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v.as_object_mut().unwrap().remove("config");
        v
    };
    assert_eq!(strip(&from_seq), strip(&from_csv));
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(
        &cfg,
        "# alternating pair, checked against expectations\n\
         command = verdict\n\
         sequence = cycle: point(1,0) | point(-1,0)\n\
         target = points((1,0), (-1,0))\n\
         probe = 0,1\n\
         probe = 1,0\n\
         lambda = 2n\n\
         eps = 0.5\n\
         mode = i_conv\n\
         expect = i_conv=violated\n",
    )
    .unwrap();
    let o = wijsum(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["lambda"], "2n");
    assert_eq!(v["report"]["diffs"], 0);

    // with eps = 3 no deviation counts, so the expected violation is a diff
    let o = wijsum(&["--config", cfg.to_str().unwrap(), "--eps", "3"]);
    assert_eq!(code(&o), 1);
    let o = wijsum(&["verdict", "--config", cfg.to_str().unwrap(), "--format", "csv"]);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("probe_index,n,lambda_n,series_kind,value\n"));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let o = wijsum(&["conditions", "--lambda", "2^n", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(v["report"]["lambda"], "2^n");
    assert!(v.get("wall_time_s").is_none());
    let o = wijsum(&["conditions", "--lambda", "2^n", "--timing"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn lambda_list_file() {
    let dir = tempfile::tempdir().unwrap();
    let list = dir.path().join("lambda.txt");
    let body: String = (1..=40u64).map(|n| format!("{}\n", n * n)).collect();
    std::fs::write(&list, format!("# squares\n{body}")).unwrap();
    let spec = format!("@{}", list.display());
    let o = wijsum(&["conditions", "--lambda", &spec, "--horizon", "30", "--expect", "limsup_step_ratio=fails"]);
    // the window starts at n = 15, where (16/15)^2 is 14% above 1
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::write(&list, "1\n4\n4\n").unwrap();
    assert_eq!(code(&wijsum(&["conditions", "--lambda", &spec])), 2);
}
