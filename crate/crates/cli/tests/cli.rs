use std::process::{Command, Output};

use hulldim::sweep::{read_csv, SweepRow};
use serde_json::Value;

fn hulldim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hulldim"))
        .args(args)
        .env_remove("HULLDIM_LIMIT")
        .env_remove("HULLDIM_WORKERS")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let out = hulldim(&full);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("json output")
}

#[test]
fn factor_reports() {
    let doc = json(&["factor", "--q", "2", "--n", "5", "--r", "1"]);
    assert_eq!((doc["s"].as_u64(), doc["t"].as_u64()), (Some(1), Some(1)));

    let doc = json(&["factor", "--q", "3", "--n", "3", "--r", "1"]);
    assert_eq!(
        (doc["nbar"].as_u64(), doc["nu"].as_u64()),
        (Some(1), Some(1))
    );

    let doc = json(&["factor", "--q", "2", "--n", "1", "--r", "1"]);
    assert_eq!(doc["s"], 1);
    assert_eq!(doc["t"], 0);
    // x - 1 = x + 1 in characteristic 2
    assert_eq!(doc["scr"][0], "[[1,0],[1,0]]");
}

#[test]
fn hull_dimensions() {
    for (exp, dim) in [("0,1,0", 2), ("0,0,0", 0), ("1,1,1", 0)] {
        let doc = json(&["hull", "--q", "2", "--n", "5", "--r", "1", "--exp", exp]);
        assert_eq!(doc["hull_dim"], dim, "exp {exp}");
    }
}

#[test]
fn hull_wrong_arity_is_usage_error() {
    let out = hulldim(&["hull", "--q", "2", "--n", "5", "--r", "1", "--exp", "0,1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("needs 3 values"));
}

#[test]
fn avg_examples() {
    let doc = json(&["avg", "--q", "2", "--n", "5", "--r", "1", "--verify"]);
    assert_eq!(
        (doc["EH"]["num"].as_i64(), doc["EH"]["den"].as_i64()),
        (Some(1), Some(1))
    );
    assert_eq!(doc["oracle_agrees"], true);

    let doc = json(&["avg", "--q", "3", "--n", "4", "--r", "2"]);
    assert_eq!(doc["EH"]["num"], 1);
    assert_eq!(doc["bound_class"], "LowerQuarter");

    let doc = json(&["avg", "--q", "2", "--n", "3", "--r", "1"]);
    assert_eq!(doc["EH"]["num"], 0);
    assert_eq!(doc["bound_class"], "Zero");
}

#[test]
fn explicit_lambda_overrides_order() {
    let by_r = json(&["avg", "--q", "3", "--n", "4", "--r", "2", "--verify"]);
    let by_lambda = json(&["avg", "--q", "3", "--n", "4", "--lambda", "[2]", "--verify"]);
    assert_eq!(by_r["EH"], by_lambda["EH"]);
    assert_eq!(by_lambda["r"], 2);

    let out = hulldim(&["avg", "--q", "3", "--n", "4", "--r", "4", "--lambda", "[2]"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_over_limit_warns() {
    let out = Command::new(env!("CARGO_BIN_EXE_hulldim"))
        .args([
            "--format", "json", "avg", "--q", "2", "--n", "15", "--r", "1", "--verify",
        ])
        .env("HULLDIM_LIMIT", "10")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc.get("oracle_agrees").is_none());
}

#[test]
fn precondition_failures_exit_3() {
    let out = hulldim(&["avg", "--q", "3", "--n", "4", "--r", "3"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("r must divide q + 1"));

    let out = hulldim(&["factor", "--q", "6", "--n", "4", "--r", "1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bad_flags_exit_2() {
    assert_eq!(hulldim(&["avg", "--q", "3"]).status.code(), Some(2));
    assert_eq!(hulldim(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        hulldim(&["sweep", "--q", "2", "--n-max", "0"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn sweep_csv_round_trips() {
    let out = hulldim(&["sweep", "--q", "2", "--n-max", "8", "--out", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with(
        "n,q,p,nu,nbar,r,gamma,v2_nbar,v2_r,B,EH_num,EH_den,class,lower_num,lower_den,r_in_Mq,n_in_Mq\n"
    ));
    let rows = read_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 16);
    assert!(rows.iter().all(|row| row.r == 1 || row.r == 3));
    for row in &rows {
        assert_eq!(&SweepRow::compute(row.n, row.r, row.q).unwrap(), row);
    }
}

#[test]
fn sweep_contains_anchor_and_is_deterministic() {
    let run = |workers: &str| {
        Command::new(env!("CARGO_BIN_EXE_hulldim"))
            .args([
                "sweep",
                "--q",
                "3",
                "--n-max",
                "4",
                "--verify-max",
                "100000",
            ])
            .env("HULLDIM_WORKERS", workers)
            .output()
            .unwrap()
    };
    let a = run("1");
    let b = run("3");
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let rows = read_csv(a.stdout.as_slice()).unwrap();
    let anchor = rows.iter().find(|r| r.n == 4 && r.r == 2).unwrap();
    assert_eq!((anchor.b, anchor.eh_num, anchor.eh_den), (0, 1, 1));
}

#[test]
fn sweep_json_output() {
    let out = hulldim(&["sweep", "--q", "4", "--n-max", "3", "--out", "json"]);
    assert!(out.status.success());
    let rows: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 6);
    assert_eq!(rows[0]["q"], 4);
}
