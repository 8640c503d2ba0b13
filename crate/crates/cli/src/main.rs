use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gambler::capture::{self, RandomizedStrategy, Walk};
use gambler::experiment::{self, ExperimentName, ExperimentParams, Format};
use gambler::gamble::{Gamble, MetaGamble};
use gambler::graph::{Graph, RootedTree};
use gambler::rational::int;
use gambler::sim::{self, Opponent, SimConfig};
use gambler::solver::{self, DEFAULT_TOL};
use gambler::strategies::{self, CopStrategy, StrategyName};
use serde_json::json;

#[derive(Parser)]
#[command(name = "cop-gambler", version, about = "Cop-vs-gambler pursuit game engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact expected capture time of one walk.
    EvalWalk {
        #[command(flatten)]
        input: GameInput,
        /// Walk literal: "start | p1 .. pk | absorb a" or "start | p1 .. pk | loop c1 .. cL".
        #[arg(long)]
        walk: String,
        #[command(flatten)]
        output: Output,
    },
    /// Greedy branch strategy against a known gamble (lifted through the
    /// BFS spanning tree on non-tree graphs). Asserts E <= n.
    TreeStrategy {
        #[command(flatten)]
        input: GameInput,
        #[arg(long, default_value_t = 0)]
        start: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Value iteration against a known gamble: per-vertex values, sandwich and
    /// extracted walk. Asserts the sandwich upper bound is at most n.
    Solve {
        #[command(flatten)]
        input: GameInput,
        #[arg(long, default_value_t = 0)]
        start: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Monte Carlo play of a named strategy; the JSON report goes to --out
    /// or stdout. Fails if an available exact value lies outside 4 sigma.
    Simulate {
        #[command(flatten)]
        input: GameInput,
        /// tree, spanning-tree, cycle-circle, star-sweep:1, star-sweep:2, dfs-patrol or stay:<v>.
        #[arg(long)]
        strategy: String,
        #[arg(long, default_value_t = 0)]
        start: usize,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs a named experiment: value-n, tree-bound, star, cycle, dfs-patrol
    /// or conjecture-probe.
    Experiment {
        name: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        gambles: Option<usize>,
        /// Monte Carlo trials per cross-checked case (0 disables).
        #[arg(long)]
        trials: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args)]
struct GameInput {
    /// Edge-list file: "n m" header, then m lines "u v". `#` starts a comment.
    #[arg(long)]
    graph: PathBuf,
    /// Gamble file of "v p" lines, or "uniform".
    #[arg(long, conflicts_with = "meta")]
    gamble: Option<String>,
    /// Meta-gamble: random-sitter, uniform-leaves, interval[:k], or a file of
    /// "weight w" blocks followed by "v p" lines.
    #[arg(long)]
    meta: Option<String>,
}

#[derive(Args)]
struct Output {
    /// json, csv or text.
    #[arg(long, default_value = "text")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Output {
    fn format(&self) -> Result<Format> {
        Ok(self.format.parse()?)
    }

    fn write(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

impl GameInput {
    fn graph(&self) -> Result<Graph> {
        Graph::parse(&read(&self.graph)?).with_context(|| format!("parsing graph {}", self.graph.display()))
    }

    fn gamble(&self, g: &Graph) -> Result<Option<Gamble>> {
        match self.gamble.as_deref() {
            None => Ok(None),
            Some("uniform") => Ok(Some(Gamble::uniform(g.n())?)),
            Some(f) => Ok(Some(Gamble::parse(&read(Path::new(f))?, g.n()).with_context(|| format!("parsing gamble {f}"))?)),
        }
    }

    fn require_gamble(&self, g: &Graph) -> Result<Gamble> {
        match self.gamble(g)? {
            Some(gm) => Ok(gm),
            None => bail!("this command needs --gamble"),
        }
    }

    fn meta(&self, g: &Graph) -> Result<Option<MetaGamble>> {
        let Some(arg) = self.meta.as_deref() else { return Ok(None) };
        let n = g.n();
        let leaves = || {
            let l = g.leaves();
            if l.is_empty() {
                (0..n).collect()
            } else {
                l
            }
        };
        let m = match arg.split_once(':').map_or((arg, None), |(a, b)| (a, Some(b))) {
            ("random-sitter", None) => MetaGamble::random_sitter(n, &leaves())?,
            ("uniform-leaves", None) => MetaGamble::single(Gamble::uniform_on(n, &leaves())?),
            ("interval", k) => {
                if g.cycle_order(0).is_none() {
                    bail!("interval meta-gambles need a cycle graph");
                }
                let k = match k {
                    Some(k) => k.parse().with_context(|| format!("bad interval width {k:?}"))?,
                    None => MetaGamble::default_interval_width(n),
                };
                MetaGamble::interval(n, k)?
            }
            _ => MetaGamble::parse(&read(Path::new(arg))?, n).with_context(|| format!("parsing meta-gamble {arg}"))?,
        };
        Ok(Some(m))
    }

    fn opponent(&self, g: &Graph) -> Result<Opponent> {
        if let Some(m) = self.meta(g)? {
            return Ok(m.into());
        }
        match self.gamble(g)? {
            Some(gm) => Ok(gm.into()),
            None => bail!("give --gamble or --meta"),
        }
    }
}

fn as_meta(o: &Opponent) -> MetaGamble {
    match o {
        Opponent::Gamble(g) => MetaGamble::single(g.clone()),
        Opponent::Meta(m) => m.clone(),
    }
}

/// Renders key/value pairs as text or a flat JSON object.
fn render(format: Format, pairs: &[(&str, serde_json::Value)]) -> Result<String> {
    Ok(match format {
        Format::Json => {
            let map: serde_json::Map<String, serde_json::Value> = pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
            serde_json::to_string_pretty(&map)? + "\n"
        }
        Format::Csv => {
            let keys: Vec<&str> = pairs.iter().map(|(k, _)| *k).collect();
            let vals: Vec<String> = pairs.iter().map(|(_, v)| csv_value(v)).collect();
            format!("{}\n{}\n", keys.join(","), vals.join(","))
        }
        Format::Text => pairs.iter().map(|(k, v)| format!("{k:<12} {}\n", text_value(v))).collect(),
    })
}

fn text_value(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn csv_value(v: &serde_json::Value) -> String {
    let s = text_value(v);
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}

fn eval_walk(input: &GameInput, walk: &str, output: &Output) -> Result<bool> {
    let g = input.graph()?;
    let w = Walk::parse(walk, &g)?;
    let e = capture::expected_capture_meta(&RandomizedStrategy::pure(w.clone()), &as_meta(&input.opponent(&g)?))?;
    output.write(&render(output.format()?, &[("walk", json!(w.to_string())), ("expected", json!(e.to_string())), ("approx", json!(e.to_f64()))])?)?;
    Ok(true)
}

fn tree_strategy(input: &GameInput, start: usize, output: &Output) -> Result<bool> {
    let g = input.graph()?;
    let gm = input.require_gamble(&g)?;
    let n = g.n();
    let w = strategies::known_gamble_walk(&g, &gm, start)?;
    let e = capture::expected_capture_time(&w, &gm)?;
    let mut pass = e.le(&int(n as i64));
    let mut pairs = vec![("walk", json!(w.to_string())), ("expected", json!(e.to_string())), ("bound", json!(n.to_string()))];
    if g.is_tree() {
        let check = experiment::check_tree_strategy(&RootedTree::new(g.clone(), start)?, &gm);
        pass &= check.suffixes_ok;
        pairs.push(("suffixes_ok", json!(check.suffixes_ok)));
    }
    pairs.push(("pass", json!(pass)));
    output.write(&render(output.format()?, &pairs)?)?;
    Ok(pass)
}

fn solve(input: &GameInput, start: usize, tol: f64, output: &Output) -> Result<bool> {
    let g = input.graph()?;
    let gm = input.require_gamble(&g)?;
    let s = solver::value_sandwich(&g, &gm, start, tol)?;
    let pass = s.upper.le(&int(g.n() as i64));
    let format = output.format()?;
    let values: Vec<String> = s.table.values.iter().map(|v| format!("{v:.12}")).collect();
    let pairs = [
        ("start", json!(start)),
        ("values", if format == Format::Json { json!(s.table.values) } else { json!(values.join(" ")) }),
        ("iterations", json!(s.table.iterations)),
        ("lower", json!(s.lower)),
        ("upper", json!(s.upper.to_string())),
        ("upper_approx", json!(s.upper.to_f64())),
        ("width", json!(s.width())),
        ("walk", json!(s.walk.to_string())),
        ("pass", json!(pass)),
    ];
    output.write(&render(format, &pairs)?)?;
    Ok(pass)
}

fn simulate(
    input: &GameInput,
    strategy: &str,
    start: usize,
    trials: u64,
    seed: u64,
    threads: Option<usize>,
    out: Option<&Path>,
) -> Result<bool> {
    let g = input.graph()?;
    let opponent = input.opponent(&g)?;
    let known = match &opponent {
        Opponent::Gamble(gm) => Some(gm.clone()),
        Opponent::Meta(_) => None,
    };
    let name: StrategyName = strategy.parse()?;
    let cop = CopStrategy::build(name, &g, start, known.as_ref())?;
    let cfg = SimConfig { threads, ..SimConfig::new(trials, seed) };
    let report = sim::simulate(&cop, &opponent, cfg)?;
    let exact = cop.exact_vs_meta(&as_meta(&opponent)).ok().filter(|e| e.is_finite());
    let comparison = exact.as_ref().map(|e| sim::compare_exact_vs_mc([(strategy, e.to_f64(), &report)]).remove(0));
    let exact = exact.map(|e| e.to_string());
    let pass = comparison.as_ref().is_none_or(|c| !c.flagged);
    let doc = json!({ "report": report, "exact": exact, "comparison": comparison });
    let text = serde_json::to_string_pretty(&doc)? + "\n";
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(pass)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::EvalWalk { input, walk, output } => eval_walk(&input, &walk, &output),
        Command::TreeStrategy { input, start, output } => tree_strategy(&input, start, &output),
        Command::Solve { input, start, tol, output } => solve(&input, start, tol, &output),
        Command::Simulate { input, strategy, start, trials, seed, threads, out } => {
            simulate(&input, &strategy, start, trials, seed, threads, out.as_deref())
        }
        Command::Experiment { name, seed, n, count, gambles, trials, output } => {
            let name: ExperimentName = name.parse()?;
            let format = output.format()?;
            let result = experiment::run_experiment(name, &ExperimentParams { seed, n, count, gambles, trials })?;
            output.write(&experiment::emit(&result, format))?;
            for f in result.failures() {
                eprintln!("bound failed: case {} {}: {} vs claimed {}", f.case, f.anchor, f.value, f.claimed);
            }
            Ok(result.all_pass())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
