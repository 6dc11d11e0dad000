use serde_json::Value;
use std::io::Write;
use std::process::{Command, Output};

fn heatdgg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heatdgg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json_lines(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).expect("every line is JSON"))
        .collect()
}

#[test]
fn validate_exit_codes() {
    let ok = heatdgg(&["validate", "--generator", "lattice-window-20"]);
    assert_eq!(code(&ok), 0);
    assert_eq!(json_lines(&ok)[0]["certificate"]["is_intrinsic"], true);

    // combinatorial distance on a physical star: Σ μ d² = 3 > m = 1 at the center
    let star = heatdgg(&["validate", "--generator", "star-3", "--measure", "physical"]);
    assert_eq!(code(&star), 1);
    assert_eq!(json_lines(&star)[0]["certificate"]["max_ratio"], 3.0);

    let fixed = heatdgg(&[
        "validate",
        "--generator",
        "star-3",
        "--measure",
        "physical",
        "--metric",
        "default-intrinsic",
    ]);
    assert_eq!(code(&fixed), 0);
}

#[test]
fn input_errors_exit_2() {
    let mut bad = tempfile::Builder::new().suffix(".json").tempfile().unwrap();
    write!(bad, "{{\"edges\": [").unwrap();
    let out = heatdgg(&["validate", "--graph", bad.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(!out.stderr.is_empty());

    assert_eq!(code(&heatdgg(&["validate"])), 2);
    assert_eq!(
        code(&heatdgg(&[
            "dgg",
            "--generator",
            "path-5",
            "--t-grid",
            "3,2"
        ])),
        2
    );
    assert_eq!(
        code(&heatdgg(&[
            "dgg",
            "--generator",
            "path-5",
            "--set-a",
            "nope"
        ])),
        2
    );
    assert_eq!(code(&heatdgg(&["no-such-command"])), 2);
    assert_eq!(
        code(&heatdgg(&[
            "validate",
            "--generator",
            "path-3",
            "--tol",
            "0"
        ])),
        2
    );
}

#[test]
fn hypothesis_violation_exits_3() {
    let out = heatdgg(&[
        "dgg",
        "--generator",
        "star-3",
        "--measure",
        "physical",
        "--t-grid",
        "1",
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn dgg_sweep_reports_and_summary() {
    let out = heatdgg(&[
        "dgg",
        "--generator",
        "lattice-window-40",
        "--set-a",
        "0",
        "--set-b",
        "10",
        "--t-grid",
        "log:0.01:100:20",
        "--lambda",
        "zero",
    ]);
    assert_eq!(code(&out), 0);
    let lines = json_lines(&out);
    assert_eq!(lines.len(), 21);
    assert_eq!(lines[0]["params"]["r"], 10.0);
    let summary = lines.last().unwrap();
    assert_eq!(summary["summary"], true);
    assert_eq!(summary["failures"], 0);
    assert_eq!(summary["checks"], 20);
}

#[test]
fn wrong_lambda_is_caught() {
    let out = heatdgg(&[
        "dgg",
        "--generator",
        "lattice-window-10",
        "--set-a",
        "0",
        "--set-b",
        "3",
        "--lambda",
        "999",
    ]);
    assert_eq!(code(&out), 1);
    assert!(
        json_lines(&out).last().unwrap()["failures"]
            .as_u64()
            .unwrap()
            > 0
    );
}

#[test]
fn seeded_campaigns_are_reproducible() {
    let args = [
        "dgg",
        "--generator",
        "complete-6",
        "--measure",
        "physical",
        "--metric",
        "default-intrinsic",
        "--set-a",
        "0",
        "--set-b",
        "1",
        "--t-grid",
        "0.1,1",
        "--random-sets",
        "10",
        "--functional-trials",
        "10",
        "--seed",
        "7",
        "--workers",
        "2",
    ];
    let a = heatdgg(&args);
    let b = heatdgg(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json_lines(&a).len(), 2 + 10 + 10 + 1);
}

#[test]
fn csv_graph_input_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.csv");
    std::fs::write(&graph, "u,v,mu\na,b,1\nb,c,2\nc,d,0.5\n").unwrap();
    let out_path = dir.path().join("report.jsonl");
    let out = heatdgg(&[
        "dgg",
        "--graph",
        graph.to_str().unwrap(),
        "--metric",
        "default-intrinsic",
        "--t-grid",
        "lin:0.5:4:4",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&out_path).unwrap();
    // all 16 singleton pairs at 4 times, plus the summary
    assert_eq!(text.lines().count(), 16 * 4 + 1);
}

#[test]
fn imp_subcommand() {
    let out = heatdgg(&[
        "imp",
        "--generator",
        "lattice-window-20",
        "--omega=-10..10",
        "--set-a",
        "0",
        "--kappa",
        "0.5,1,2",
    ]);
    assert_eq!(code(&out), 0);
    let lines = json_lines(&out);
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0]["times"].as_array().unwrap().len(), 50);
}

#[test]
fn zeta_table_and_pang() {
    let out = heatdgg(&[
        "zeta-table",
        "--s",
        "0.25",
        "--t-grid",
        "log:0.01:1000:5",
        "--r-grid",
        "0,1,100",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(json_lines(&out).len(), 5 * 3 + 1);

    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("scan.csv");
    let out = heatdgg(&[
        "pang",
        "--d-max",
        "10",
        "--t-max",
        "16",
        "--t-points",
        "9",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("d,t,p,oracle_p,envelope_ratio,regime\n"));
    assert_eq!(text.lines().count(), 1 + 10 * 9);
}

#[test]
fn spectrum_and_decay() {
    let out = heatdgg(&["spectrum", "--generator", "path-2", "--measure", "physical"]);
    assert_eq!(code(&out), 0);
    let report = &json_lines(&out)[0];
    assert_eq!(report["eigenvalues"].as_array().unwrap().len(), 2);
    assert!((report["eigenvalues"][1].as_f64().unwrap() - 2.0).abs() < 1e-12);

    let out = heatdgg(&[
        "spectrum",
        "--generator",
        "lattice-window-30",
        "--omega=-5..5",
        "--vertex",
        "0",
        "--exhaust",
        "2,4,8",
    ]);
    assert_eq!(code(&out), 0);
    let lines = json_lines(&out);
    assert_eq!(lines[1]["nonincreasing"], true);
    assert_eq!(lines[2]["pass"], true);
}

#[test]
fn kernel_dump() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("k.csv");
    let out = heatdgg(&[
        "kernel",
        "--generator",
        "star-3",
        "--t",
        "1",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("x,y,t,p\n"));
    assert_eq!(text.lines().count(), 1 + 16);
    assert_eq!(json_lines(&out)[0]["invariants"]["conservative"], true);
}

#[test]
fn help_lists_subcommands() {
    let out = heatdgg(&["--help"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    for cmd in [
        "validate",
        "dgg",
        "imp",
        "pang",
        "zeta-table",
        "spectrum",
        "kernel",
    ] {
        assert!(text.contains(cmd), "{cmd}");
    }
}
