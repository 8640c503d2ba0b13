use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cop-gambler"))
}

struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("cop-gambler-{tag}-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn file(&self, name: &str, body: &str) -> String {
        let p = self.0.join(name);
        fs::write(&p, body).unwrap();
        p.to_string_lossy().into_owned()
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output { status, stdout, stderr } = cmd.output().unwrap();
    (status.code().unwrap_or(-1), String::from_utf8(stdout).unwrap(), String::from_utf8(stderr).unwrap())
}

const P4: &str = "4 3\n0 1\n1 2\n2 3\n";
const STAR5: &str = "# K_1,4\n5 4\n0 1\n0 2\n0 3\n0 4\n";

#[test]
fn eval_walk_uniform_is_n() {
    let s = Scratch::new("eval");
    let g = s.file("p4.txt", P4);
    let (code, out, err) = run(bin().args(["eval-walk", "--graph", &g, "--gamble", "uniform", "--walk", "0 | 1 2 | loop 3 2"]));
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("4/1"), "{out}");
}

#[test]
fn eval_walk_rejects_illegal_walk() {
    let s = Scratch::new("illegal");
    let g = s.file("p4.txt", P4);
    let (code, _, err) = run(bin().args(["eval-walk", "--graph", &g, "--gamble", "uniform", "--walk", "0 | 2 | absorb 2"]));
    assert_eq!(code, 2);
    assert!(err.contains("error"), "{err}");
}

#[test]
fn tree_strategy_json() {
    let s = Scratch::new("tree");
    let g = s.file("p4.txt", P4);
    let gm = s.file("g.txt", "0 1/2\n3 1/2\n");
    let (code, out, err) = run(bin().args(["tree-strategy", "--graph", &g, "--gamble", &gm, "--format", "json"]));
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["expected"], "2/1");
    assert_eq!(v["pass"], true);
    assert_eq!(v["suffixes_ok"], true);
}

#[test]
fn solve_reports_sandwich() {
    let s = Scratch::new("solve");
    let g = s.file("s5.txt", STAR5);
    let (code, out, err) = run(bin().args(["solve", "--graph", &g, "--gamble", "uniform", "--format", "json"]));
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["upper"], "5/1");
    assert!((v["lower"].as_f64().unwrap() - 5.0).abs() < 1e-9);
    assert_eq!(v["values"].as_array().unwrap().len(), 5);
}

#[test]
fn simulate_writes_reproducible_report() {
    let s = Scratch::new("sim");
    let g = s.file("s5.txt", STAR5);
    let outs: Vec<String> = ["1", "4"]
        .iter()
        .map(|t| {
            let out = s.0.join(format!("r{t}.json"));
            let (code, _, err) = run(bin().args([
                "simulate", "--graph", &g, "--meta", "uniform-leaves", "--strategy", "star-sweep:1", "--trials", "20000",
                "--seed", "9", "--threads", t, "--out",
            ])
            .arg(&out));
            assert_eq!(code, 0, "{err}");
            fs::read_to_string(out).unwrap()
        })
        .collect();
    assert_eq!(outs[0], outs[1]);
    let v: serde_json::Value = serde_json::from_str(&outs[0]).unwrap();
    assert_eq!(v["exact"], "8/1");
    assert_eq!(v["report"]["trials"], 20000);
    assert_eq!(v["comparison"]["flagged"], false);
}

#[test]
fn simulate_needs_an_opponent() {
    let s = Scratch::new("noopp");
    let g = s.file("p4.txt", P4);
    let (code, _, err) = run(bin().args(["simulate", "--graph", &g, "--strategy", "dfs-patrol"]));
    assert_eq!(code, 2);
    assert!(err.contains("--gamble or --meta"), "{err}");
}

#[test]
fn experiment_star_csv() {
    let (code, out, err) = run(bin().args(["experiment", "star", "--n", "5", "--format", "csv"]));
    assert_eq!(code, 0, "{err}");
    let mut lines = out.lines();
    assert!(lines.next().unwrap().starts_with("case,label,n"));
    let row = lines.next().unwrap();
    assert!(row.contains(",5/1,8/1,"), "{row}");
}

#[test]
fn experiment_is_deterministic() {
    let args = ["experiment", "dfs-patrol", "--count", "5", "--n", "15", "--seed", "4", "--format", "json"];
    let (c1, a, _) = run(bin().args(args));
    let (c2, b, _) = run(bin().args(args));
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
}

#[test]
fn unknown_experiment_fails() {
    let (code, _, err) = run(bin().args(["experiment", "bogus"]));
    assert_eq!(code, 2);
    assert!(err.contains("unknown experiment"));
}
