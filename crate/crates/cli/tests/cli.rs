use std::path::Path;
use std::process::{Command, Output};

fn recon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_recon")).args(args).output().expect("binary runs")
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> (Output, Vec<u8>) {
    let out = dir.join(name);
    let mut all: Vec<&str> = args.to_vec();
    let o = out.to_str().unwrap().to_string();
    all.extend(["--out", &o]);
    let r = recon(&all);
    let bytes = std::fs::read(&out).unwrap_or_default();
    (r, bytes)
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(recon(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(recon(&[]).status.code(), Some(2));
    assert_eq!(recon(&["population", "--no-such-flag"]).status.code(), Some(2));
}

#[test]
fn invalid_settings_exit_with_2_and_say_why() {
    let r = recon(&["population", "--k", "2"]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("--k"));
    assert_eq!(recon(&["population", "--law", "binomial:3"]).status.code(), Some(2));
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# population settings\nk = 4\nseed = 11\npop = 50\ngens = 2\ninit=uniform\n").unwrap();
    let c = cfg.to_str().unwrap();
    let (r, bytes) = run_to(dir.path(), "a.csv", &["population", "--config", c, "--seed", "12"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let text = String::from_utf8(bytes).unwrap();
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("# config "));
    assert!(first.contains(r#""k":4"#) && first.contains(r#""seed":12"#) && first.contains(r#""pop":50"#), "{first}");
    std::fs::write(&cfg, "colours = 4\n").unwrap();
    assert_eq!(recon(&["population", "--config", c]).status.code(), Some(2));
}

#[test]
fn uniform_start_gives_a_constant_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let (r, bytes) = run_to(dir.path(), "t.csv", &["population", "--init", "uniform", "--k", "5", "--pop", "200", "--gens", "4"]);
    assert!(r.status.success());
    let text = String::from_utf8(bytes).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 5);
    let tail = |row: &str| row.split_once(',').unwrap().1.to_string();
    assert!(rows.iter().all(|r| tail(r) == tail(rows[0])));
    assert!(tail(rows[0]).starts_with("0.2,0,0,0,"));
}

#[test]
fn measure_output_reads_back() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.csv");
    let ms = m.to_str().unwrap();
    let (r, _) = run_to(dir.path(), "t.csv", &["population", "--pop", "300", "--gens", "2", "--measure-out", ms]);
    assert!(r.status.success());
    let (r2, _) = run_to(dir.path(), "t2.csv", &["population", "--pop", "300", "--gens", "1", "--init", ms]);
    assert!(r2.status.success(), "{}", String::from_utf8_lossy(&r2.stderr));
    let (r3, _) = run_to(dir.path(), "t3.csv", &["population", "--k", "4", "--init", ms]);
    assert_eq!(r3.status.code(), Some(2));
}

#[test]
fn bp_oracle_default_passes_its_check() {
    let r = recon(&["bp-oracle", "--check"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let v: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    assert_eq!(v["report"]["instances"], 100);
    assert!(v["report"]["max_deviation"].as_f64().unwrap() <= 1e-10);
    assert_eq!(v["config"]["seed"], 1);
}

#[test]
fn failed_check_exits_nonzero_but_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["stable-law", "--ks", "1000,2000", "--pop", "500"];
    let (plain, _) = run_to(dir.path(), "a.json", &args);
    assert_eq!(plain.status.code(), Some(0));
    let mut checked = args.to_vec();
    checked.push("--check");
    let (r, bytes) = run_to(dir.path(), "b.json", &checked);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("FAIL"));
    let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(v["checks"][0]["passed"], false);
}

#[test]
fn alice_bob_writes_a_board_bob_can_read() {
    let dir = tempfile::tempdir().unwrap();
    let b = dir.path().join("b.json");
    let t = dir.path().join("t.txt");
    let (r, bytes) = run_to(
        dir.path(),
        "a.json",
        &[
            "alice-bob", "--law", "poisson:6", "--depth", "2", "--pop", "500", "--records", "3", "--ndom", "4000",
            "--gens", "8", "--board-out", b.to_str().unwrap(), "--tree-out", t.to_str().unwrap(), "--check",
        ],
    );
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(v["report"]["bob_mismatches"], 0);
    let board = broadcast_recon::alice_bob::BobArray::from_json(&std::fs::read_to_string(&b).unwrap()).unwrap();
    let dump = std::fs::read_to_string(&t).unwrap();
    assert_eq!(dump.lines().next(), Some("index parent depth colour"));
    assert_eq!(dump.lines().count() - 1, board.nodes().len());
}

#[test]
fn reports_do_not_depend_on_the_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 3] = [
        &["population", "--pop", "2000", "--gens", "3"],
        &["full-vs-reduced", "--pop", "3000"],
        &["alice-bob", "--law", "poisson:6", "--depth", "2", "--pop", "300", "--records", "4", "--ndom", "3000", "--gens", "5"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let mut outs = Vec::new();
        for w in ["1", "3"] {
            let mut a = args.to_vec();
            a.extend(["--workers", w]);
            let (r, bytes) = run_to(dir.path(), &format!("{i}-{w}"), &a);
            assert!(r.status.success());
            outs.push(bytes);
        }
        assert!(!outs[0].is_empty());
        assert_eq!(outs[0], outs[1], "{args:?}");
    }
}
