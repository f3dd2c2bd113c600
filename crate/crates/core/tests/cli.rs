//! The `persuade` binary end to end: file formats, exit codes and the run directory.

use std::path::Path;
use std::process::{Command, Output};

fn persuade(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_persuade"))
        .args(args)
        .current_dir(dir)
        .env_remove("PERSUADE_OUT_DIR")
        .env_remove("PERSUADE_THREADS")
        .output()
        .unwrap()
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = persuade(args, dir);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn csv_rows(text: &str) -> Vec<std::collections::HashMap<String, String>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    reader
        .records()
        .map(|r| headers.iter().map(String::from).zip(r.unwrap().iter().map(String::from)).collect())
        .collect()
}

#[test]
fn solve_lp_on_flower_reports_one_half() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&["gen-game", "--family", "flower", "--n", "4", "--tau", "0.16666666666666666", "--out", "g.json"], tmp.path());
    let text = ok(&["solve-lp", "--game", "g.json"], tmp.path());
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!((value["objective"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert_eq!(value["scheme"]["x"].as_array().unwrap().len(), 4);
}

#[test]
fn simulate_round_one_of_revealing_scheme_is_bpr() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&["gen-game", "--family", "random", "--states", "3", "--actions", "3", "--out", "g.json", "--seed", "4"], tmp.path());
    let game: persuasion::PersuasionGame = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("g.json")).unwrap()).unwrap();
    let revealing = persuasion::JointScheme::fully_revealing(&game);
    std::fs::write(tmp.path().join("s.json"), serde_json::to_string(&revealing).unwrap()).unwrap();
    let text = ok(&["simulate", "--game", "g.json", "--scheme", "s.json", "--k", "1", "--replicates", "100", "--seed", "2"], tmp.path());
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 1);
    let estimate: f64 = rows[0]["estimate"].parse().unwrap();
    assert!((estimate - persuasion::bpr(&game, &revealing)).abs() < 1e-12);
    for column in ["master_seed", "n_replicates", "tool_version"] {
        assert!(rows[0].contains_key(column), "missing {column}");
    }
    assert_eq!(rows[0]["master_seed"], "2");
}

#[test]
fn bounds_on_lp_flower_scheme_are_infinite() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&["gen-game", "--family", "flower", "--n", "4", "--out", "g.json"], tmp.path());
    ok(&["solve-lp", "--game", "g.json", "--out", "lp.json"], tmp.path());
    let text = ok(&["bounds", "--game", "g.json", "--scheme", "lp.json", "--k", "1,100", "--replicates", "200"], tmp.path());
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r["bound"] == "inf"));
}

#[test]
fn optimizers_write_feasible_schemes() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&["gen-game", "--family", "flower", "--n", "3", "--tau", "0.2", "--out", "g.json"], tmp.path());
    ok(
        &["optimize-sgd", "--game", "g.json", "--k-opt", "10", "--iters", "3", "--batch", "50", "--out", "sgd.json", "--history", "h.csv", "--seed", "1"],
        tmp.path(),
    );
    ok(&["optimize-br", "--game", "g.json", "--lambda", "20", "--iters", "10", "--out", "br.json"], tmp.path());
    let history = csv_rows(&std::fs::read_to_string(tmp.path().join("h.csv")).unwrap());
    assert_eq!(history.len(), 3);
    assert_eq!(history[0]["n_replicates"], "50");
    for file in ["sgd.json", "br.json"] {
        ok(&["simulate", "--game", "g.json", "--scheme", file, "--k", "5", "--replicates", "50"], tmp.path());
    }
}

#[test]
fn exit_codes_separate_config_and_numeric_failures() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("bad.toml"), "kind = \"safety\"\nmaster_seed = 1\n[city]\nn_nodes = 1\nn_incidents = 1\nincident_size = 1\n").unwrap();
    let out = persuade(&["run", "--config", "bad.toml"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("city.n_nodes"));
    assert_eq!(persuade(&["no-such-command"], tmp.path()).status.code(), Some(2));

    // a game whose sender utilities leave [0, 1] is valid input but breaks the bound
    let game = r#"{"n_states":1,"n_actions":1,"prior":[1.0],"u_sender":[[2.0]],"u_receiver":[[0.0]]}"#;
    std::fs::write(tmp.path().join("g.json"), game).unwrap();
    std::fs::write(tmp.path().join("s.json"), r#"{"x":[[1.0]]}"#).unwrap();
    let out = persuade(&["bounds", "--game", "g.json", "--scheme", "s.json", "--k", "1", "--replicates", "10"], tmp.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn run_writes_a_complete_directory_whose_config_echo_reproduces_it() {
    let tmp = tempfile::tempdir().unwrap();
    let config = "kind = \"stackelberg-gap\"\nmaster_seed = 3\nreplicates = 200\nn_values = [4]\neps_values = [0.125]\nk_grid = [1, 100]\n";
    std::fs::write(tmp.path().join("c.toml"), config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_persuade"))
        .args(["run", "--config", "c.toml"])
        .current_dir(tmp.path())
        .env("PERSUADE_OUT_DIR", "base")
        .output()
        .unwrap();
    assert!(out.status.success());
    let first = tmp.path().join("base/stackelberg-gap-seed3");
    assert!(!first.join(".partial").exists());
    let rows = csv_rows(&std::fs::read_to_string(first.join("stackelberg.csv")).unwrap());
    assert_eq!(rows[0]["sufficient_k"], "9937");
    assert_eq!(rows[0]["reference_k"], "");

    ok(&["run", "--config", "base/stackelberg-gap-seed3/config.toml", "--out", "again"], tmp.path());
    for file in ["config.toml", "stackelberg.csv", "stackelberg_curve.csv"] {
        assert_eq!(
            std::fs::read(first.join(file)).unwrap(),
            std::fs::read(tmp.path().join("again").join(file)).unwrap(),
            "{file}"
        );
    }

    // the seed flag overrides the config
    ok(&["run", "--config", "c.toml", "--out", "other", "--seed", "4"], tmp.path());
    let echo = std::fs::read_to_string(tmp.path().join("other/config.toml")).unwrap();
    assert!(echo.contains("master_seed = 4"));
}
