use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn rcd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rcd"))
        .args(args)
        .env_remove("RCD_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).display().to_string()
}

fn edge_lines(p: &Path) -> Vec<String> {
    fs::read_to_string(p)
        .unwrap()
        .lines()
        .skip(1)
        .map(str::to_owned)
        .collect()
}

fn skeleton_of(truth: &Path) -> Vec<String> {
    let mut out: Vec<String> = edge_lines(truth)
        .iter()
        .map(|l| {
            let t: Vec<&str> = l.split_whitespace().collect();
            let (a, b) = if t[0] < t[2] {
                (t[0], t[2])
            } else {
                (t[2], t[0])
            };
            format!("{a} -- {b}")
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

fn simulate(dir: &TempDir, extra: &[&str]) {
    let out = dir.path().display().to_string();
    let mut args = vec!["simulate", "--out-dir", &out];
    args.extend_from_slice(extra);
    let o = rcd(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn oracle_learning_recovers_the_simulated_skeleton() {
    let dir = TempDir::new().unwrap();
    simulate(
        &dir,
        &["--n", "9", "--p", "0.3", "--seed", "4", "--rows", "0"],
    );
    let graph = path(&dir, "graph.txt");
    for algo in [
        "marvel",
        "lmarvel",
        "rsl-w-auto",
        "rsl-d",
        "rol-hc",
        "rol-vi",
    ] {
        let sk = path(&dir, &format!("{algo}.txt"));
        let o = rcd(&[
            "learn",
            "--algo",
            algo,
            "--ci",
            "oracle",
            "--graph",
            &graph,
            "--out-skeleton",
            &sk,
        ]);
        assert_eq!(
            code(&o),
            0,
            "{algo}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        if algo == "rsl-d" {
            // The generated graph may contain diamonds; rsl-d may then miss edges.
            continue;
        }
        assert_eq!(
            edge_lines(Path::new(&sk)),
            skeleton_of(&dir.path().join("truth.txt")),
            "{algo}"
        );
    }
}

#[test]
fn latent_oracle_learning_recovers_the_mag_skeleton() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().display().to_string();
    let o = rcd(&[
        "simulate",
        "--n",
        "10",
        "--p",
        "0.3",
        "--seed",
        "2",
        "--hidden",
        "2",
        "--rows",
        "0",
        "--out-dir",
        &out,
    ]);
    assert_eq!(code(&o), 0);
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let hidden: Vec<&str> = summary["hidden"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    let latent = hidden.join(",");
    let sk = path(&dir, "sk.txt");
    let o = rcd(&[
        "learn",
        "--algo",
        "lmarvel",
        "--ci",
        "oracle",
        "--graph",
        &path(&dir, "graph.txt"),
        "--latent",
        &latent,
        "--out-skeleton",
        &sk,
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        edge_lines(Path::new(&sk)),
        skeleton_of(&dir.path().join("truth.txt"))
    );
}

#[test]
fn fisher_z_learning_writes_all_outputs() {
    let dir = TempDir::new().unwrap();
    simulate(
        &dir,
        &["--n", "6", "--p", "0.4", "--seed", "1", "--rows", "3000"],
    );
    let (sk, cp, st, tr, mb) = (
        path(&dir, "sk.txt"),
        path(&dir, "cp.txt"),
        path(&dir, "st.json"),
        path(&dir, "tr.jsonl"),
        path(&dir, "mb.json"),
    );
    let o = rcd(&[
        "learn",
        "--algo",
        "marvel",
        "--data",
        &path(&dir, "data.csv"),
        "--out-skeleton",
        &sk,
        "--out-cpdag",
        &cp,
        "--stats",
        &st,
        "--trace",
        &tr,
        "--mb-dump",
        &mb,
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stats: serde_json::Value = serde_json::from_str(&fs::read_to_string(&st).unwrap()).unwrap();
    assert_eq!(stats["variables"], 6);
    assert!(stats["stats"]["unique_tests"].as_u64().unwrap() > 0);
    assert_eq!(stats["removal_order"].as_array().unwrap().len(), 6);
    let trace = fs::read_to_string(&tr).unwrap();
    assert!(trace.lines().count() > 0);
    for line in trace.lines() {
        serde_json::from_str::<serde_json::Value>(line).unwrap();
    }
    let mb: serde_json::Value = serde_json::from_str(&fs::read_to_string(&mb).unwrap()).unwrap();
    assert_eq!(mb.as_object().unwrap().len(), 6);
    assert!(fs::read_to_string(&cp)
        .unwrap()
        .starts_with("X0 X1 X2 X3 X4 X5"));
}

#[test]
fn empty_graph_gives_an_empty_edge_list() {
    let dir = TempDir::new().unwrap();
    let g = path(&dir, "g.txt");
    fs::write(&g, "A B C\n").unwrap();
    let sk = path(&dir, "sk.txt");
    let o = rcd(&[
        "learn",
        "--algo",
        "marvel",
        "--ci",
        "oracle",
        "--graph",
        &g,
        "--out-skeleton",
        &sk,
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(&sk).unwrap().trim(), "A B C");
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(
        code(&rcd(&["learn", "--algo", "bogus", "--data", "x.csv"])),
        1
    );
    assert_eq!(
        code(&rcd(&["learn", "--algo", "marvel", "--ci", "fisher-z"])),
        1
    );
    assert_eq!(
        code(&rcd(&["learn", "--algo", "rsl-w", "--data", "x.csv"])),
        1
    );
    assert_eq!(code(&rcd(&["nonsense"])), 1);
    assert_eq!(code(&rcd(&["--help"])), 0);
    let o = Command::new(env!("CARGO_BIN_EXE_rcd"))
        .args(["oracle-check", "--max-n", "2"])
        .env("RCD_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn cpdag_is_refused_for_mag_learners() {
    let dir = TempDir::new().unwrap();
    simulate(&dir, &["--n", "5", "--p", "0.4", "--rows", "0"]);
    let o = rcd(&[
        "learn",
        "--algo",
        "lmarvel",
        "--ci",
        "oracle",
        "--graph",
        &path(&dir, "graph.txt"),
        "--out-cpdag",
        &path(&dir, "c.txt"),
    ]);
    assert_eq!(code(&o), 1);
}

#[test]
fn bad_data_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let bad = path(&dir, "bad.csv");
    fs::write(&bad, "a,b\n1,x\n").unwrap();
    assert_eq!(
        code(&rcd(&["learn", "--algo", "marvel", "--data", &bad])),
        2
    );
    let ragged = path(&dir, "ragged.csv");
    fs::write(&ragged, "a,b\n1,2\n3\n").unwrap();
    assert_eq!(
        code(&rcd(&["learn", "--algo", "marvel", "--data", &ragged])),
        2
    );
    assert_eq!(
        code(&rcd(&[
            "learn",
            "--algo",
            "marvel",
            "--data",
            &path(&dir, "missing.csv")
        ])),
        2
    );
    let cyclic = path(&dir, "cyclic.txt");
    fs::write(&cyclic, "A B\nA -> B\nB -> A\n").unwrap();
    assert_eq!(
        code(&rcd(&[
            "learn", "--algo", "marvel", "--ci", "oracle", "--graph", &cyclic
        ])),
        2
    );
}

#[test]
fn bench_reports_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = path(&dir, "cfg.json");
    fs::write(
        &cfg,
        r#"{"algorithms":["marvel","lmarvel","rsl-d","rol-hc"],"n":[7],"p":[0.3],"seeds":[0,1,2],"ci":{"kind":"oracle"}}"#,
    )
    .unwrap();
    let (a, b) = (path(&dir, "a.csv"), path(&dir, "b.csv"));
    assert_eq!(code(&rcd(&["bench", "--config", &cfg, "--out", &a])), 0);
    let o = Command::new(env!("CARGO_BIN_EXE_rcd"))
        .args(["bench", "--config", &cfg, "--out", &b])
        .env("RCD_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let report = fs::read_to_string(&a).unwrap();
    assert_eq!(report, fs::read_to_string(&b).unwrap());
    assert_eq!(report.lines().count(), 1 + 4 * 3);
    assert!(report.lines().skip(1).all(|l| l.ends_with(",ok")));

    fs::write(
        &cfg,
        r#"{"algorithms":["marvel"],"n":[7],"p":[0.3],"seeds":[0],"colour":1}"#,
    )
    .unwrap();
    assert_eq!(code(&rcd(&["bench", "--config", &cfg])), 2);
}

#[test]
fn oracle_check_passes_on_small_graphs() {
    let o = rcd(&["oracle-check", "--max-n", "3", "--random", "4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let reports: Vec<serde_json::Value> = String::from_utf8(o.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(reports.len(), 3);
    assert!(reports.iter().all(|r| r["failure_count"] == 0));
}
