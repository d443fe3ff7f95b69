use std::fs;
use std::process::Command;

use twbn_core::bench::{generate_synthetic, parse_csv};
use twbn_core::heuristic::parse_dag;
use twbn_core::model::{moralize, parse_pace_td, validate_td};

fn slim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_twbn-slim"))
}

#[test]
fn learn_writes_valid_outputs_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let (data, _) = generate_synthetic(12, 2, 2, 800, 3);
    let data_path = dir.path().join("d.dat");
    fs::write(&data_path, data.to_text()).unwrap();
    let (dag_path, td_path) = (dir.path().join("out.dag"), dir.path().join("out.td"));
    let (sub_path, wcnf_path) = (dir.path().join("sub.txt"), dir.path().join("sub.wcnf"));
    let out = slim()
        .args(["learn", "--treewidth", "2", "--time-limit", "3", "--report", "--verify"])
        .arg("--data")
        .arg(&data_path)
        .arg("--out-dag")
        .arg(&dag_path)
        .arg("--out-td")
        .arg(&td_path)
        .arg("--dump-subinstance")
        .arg(&sub_path)
        .arg("--dump-wcnf")
        .arg(&wcnf_path)
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}\n{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout.contains("delta BIC"));

    let dag = parse_dag(&fs::read_to_string(&dag_path).unwrap(), 12).unwrap();
    let td = parse_pace_td(&fs::read_to_string(&td_path).unwrap()).unwrap();
    assert!(td.width() <= 2);
    assert!(validate_td(&td, &moralize(&dag)).unwrap().is_empty());

    let improve: Vec<f64> = stdout
        .lines()
        .filter_map(|l| l.strip_prefix("IMPROVE "))
        .map(|l| l.split_whitespace().nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(improve.windows(2).all(|w| w[0] <= w[1]));
    assert!(fs::read_to_string(&wcnf_path).unwrap().starts_with("p wcnf"));
    assert!(!fs::read_to_string(&sub_path).unwrap().is_empty());
}

#[test]
fn learn_imports_an_initial_dag() {
    let dir = tempfile::tempdir().unwrap();
    let (data, _) = generate_synthetic(5, 2, 2, 300, 8);
    let data_path = dir.path().join("d.dat");
    fs::write(&data_path, data.to_text()).unwrap();
    let dag_path = dir.path().join("init.dag");
    fs::write(&dag_path, "0 <- []\n1 <- [0]\n2 <- [1]\n").unwrap();
    let out = slim()
        .args(["learn", "--treewidth", "1", "--time-limit", "1", "--oracle"])
        .arg("--data")
        .arg(&data_path)
        .arg("--initial-dag")
        .arg(&dag_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn learn_reports_bad_input() {
    let out = slim()
        .args(["learn", "--treewidth", "2", "--data", "/no/such/file"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read"));
}

#[test]
fn bench_writes_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(
        &spec,
        "treewidths = [1, 2]\nseeds = 2\ntime_limit = 0.5\n\
         [[datasets]]\nname = \"toy\"\nvariables = 6\nmax_parents = 2\narity = 2\nsamples = 300\n",
    )
    .unwrap();
    let csv = dir.path().join("out.csv");
    let out = slim()
        .arg("bench")
        .arg("--spec")
        .arg(&spec)
        .arg("--out")
        .arg(&csv)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = parse_csv(&fs::read_to_string(&csv).unwrap()).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.status == "ok" && r.final_score >= r.initial_score));
}
