//! Named experiments that check the game's quantitative claims on concrete
//! instances and emit machine-readable tables.
//!
//! Every asserted bound is a [`BoundCheck`] row; an experiment passes iff
//! all of its rows pass. Instances are drawn from per-case generators
//! seeded by `(seed, case index)`, so results do not depend on scheduling.

use std::fmt::Write as _;
use std::str::FromStr;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use thiserror::Error;

use crate::capture::{self, Expectation, Tail};
use crate::gamble::{Gamble, MetaGamble};
use crate::generate;
use crate::graph::{Graph, RootedTree};
use crate::rational::{format_rational, frac, int, Rational};
use crate::sim::{self, Comparison, Opponent, SimConfig};
use crate::solver::{self, DEFAULT_TOL};
use crate::strategies::{self, CopStrategy, StarSweep};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("unknown experiment {0:?} (expected one of value-n, tree-bound, star, cycle, dfs-patrol, conjecture-probe)")]
    Unknown(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("unknown output format {0:?} (expected json, csv or text)")]
    UnknownFormat(String),
    #[error("{0}")]
    Internal(String),
}

fn internal(e: impl std::fmt::Display) -> ExperimentError {
    ExperimentError::Internal(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentName {
    ValueN,
    TreeBound,
    Star,
    Cycle,
    DfsPatrol,
    ConjectureProbe,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 6] = [
        ExperimentName::ValueN,
        ExperimentName::TreeBound,
        ExperimentName::Star,
        ExperimentName::Cycle,
        ExperimentName::DfsPatrol,
        ExperimentName::ConjectureProbe,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::ValueN => "value-n",
            ExperimentName::TreeBound => "tree-bound",
            ExperimentName::Star => "star",
            ExperimentName::Cycle => "cycle",
            ExperimentName::DfsPatrol => "dfs-patrol",
            ExperimentName::ConjectureProbe => "conjecture-probe",
        }
    }
}

impl FromStr for ExperimentName {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ExperimentName::ALL.into_iter().find(|e| e.as_str() == s).ok_or_else(|| ExperimentError::Unknown(s.into()))
    }
}

/// Knobs shared by all experiments; `None` picks the experiment's default.
#[derive(Debug, Clone, Default)]
pub struct ExperimentParams {
    pub seed: Option<u64>,
    /// Vertex count (or maximum vertex count, for families of sizes).
    pub n: Option<usize>,
    /// Number of random instances.
    pub count: Option<usize>,
    /// Random gambles per instance (tree-bound).
    pub gambles: Option<usize>,
    /// Monte Carlo trials per cross-checked case; 0 disables simulation.
    pub trials: Option<u64>,
}

pub const DEFAULT_SEED: u64 = 0x5eed_c0b5;
const MAX_WEIGHT: u64 = 100;

/// One asserted inequality or equality.
#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub case: usize,
    /// Short claim id and what it says.
    pub anchor: String,
    pub claimed: String,
    pub value: String,
    pub pass: bool,
}

/// One case of an experiment: ordered named fields.
#[derive(Debug, Clone)]
pub struct Row {
    pub case: usize,
    pub label: String,
    pub fields: Vec<(String, String)>,
}

impl Row {
    fn new(case: usize, label: impl Into<String>) -> Self {
        Row { case, label: label.into(), fields: Vec::new() }
    }

    fn put(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.fields.push((key.to_string(), value.to_string()));
        self
    }
}

impl Serialize for Row {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.fields.len() + 2))?;
        map.serialize_entry("case", &self.case)?;
        map.serialize_entry("label", &self.label)?;
        for (k, v) in &self.fields {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub experiment: String,
    pub parameters: Vec<(String, String)>,
    pub rows: Vec<Row>,
    pub bounds: Vec<BoundCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<Vec<Comparison>>,
}

impl ExperimentResult {
    fn new(name: ExperimentName) -> Self {
        ExperimentResult {
            experiment: name.as_str().into(),
            parameters: Vec::new(),
            rows: Vec::new(),
            bounds: Vec::new(),
            simulation: None,
        }
    }

    fn param(&mut self, key: &str, value: impl ToString) {
        self.parameters.push((key.into(), value.to_string()));
    }

    /// All bound rows pass and no simulated case is flagged.
    pub fn all_pass(&self) -> bool {
        self.bounds.iter().all(|b| b.pass) && self.simulation.iter().flatten().all(|c| !c.flagged)
    }

    pub fn failures(&self) -> Vec<&BoundCheck> {
        self.bounds.iter().filter(|b| !b.pass).collect()
    }
}

/// Per-case results gathered in parallel, then appended in case order.
struct CaseOut {
    rows: Vec<Row>,
    bounds: Vec<BoundCheck>,
    sims: Vec<SimCase>,
}

struct SimCase {
    label: String,
    strategy: CopStrategy,
    opponent: Opponent,
    exact: f64,
}

impl CaseOut {
    fn new() -> Self {
        CaseOut { rows: Vec::new(), bounds: Vec::new(), sims: Vec::new() }
    }

    fn check(&mut self, case: usize, anchor: &str, claimed: impl ToString, value: impl ToString, pass: bool) {
        self.bounds.push(BoundCheck {
            case,
            anchor: anchor.into(),
            claimed: claimed.to_string(),
            value: value.to_string(),
            pass,
        });
    }
}

fn case_rng(seed: u64, case: usize) -> rand_chacha::ChaCha8Rng {
    sim::trial_rng(seed, case as u64)
}

fn collect(result: &mut ExperimentResult, outs: Vec<Result<CaseOut, ExperimentError>>, trials: u64, seed: u64) -> Result<(), ExperimentError> {
    let mut sims = Vec::new();
    for out in outs {
        let out = out?;
        result.rows.extend(out.rows);
        result.bounds.extend(out.bounds);
        sims.extend(out.sims);
    }
    if trials > 0 && !sims.is_empty() {
        let reports = sims
            .iter()
            .enumerate()
            .map(|(i, c)| sim::simulate(&c.strategy, &c.opponent, SimConfig::new(trials, seed.wrapping_add(i as u64))))
            .collect::<Result<Vec<_>, _>>()
            .map_err(internal)?;
        let cases = sims.iter().zip(&reports).map(|(c, r)| (c.label.as_str(), c.exact, r));
        result.simulation = Some(sim::compare_exact_vs_mc(cases));
    }
    Ok(())
}

fn exp_str(e: &Expectation) -> String {
    e.to_string()
}

pub fn run_experiment(name: ExperimentName, params: &ExperimentParams) -> Result<ExperimentResult, ExperimentError> {
    let seed = params.seed.unwrap_or(DEFAULT_SEED);
    let trials = params.trials.unwrap_or(0);
    let mut result = ExperimentResult::new(name);
    result.param("seed", seed);
    result.param("trials", trials);
    match name {
        ExperimentName::ValueN => value_n(&mut result, params, seed, trials)?,
        ExperimentName::TreeBound => tree_bound(&mut result, params, seed)?,
        ExperimentName::Star => star(&mut result, params, seed, trials)?,
        ExperimentName::Cycle => cycle(&mut result, params, seed, trials)?,
        ExperimentName::DfsPatrol => dfs_patrol(&mut result, params, seed, trials)?,
        ExperimentName::ConjectureProbe => conjecture_probe(&mut result, params)?,
    }
    Ok(result)
}

fn need(cond: bool, msg: &str) -> Result<(), ExperimentError> {
    if cond {
        Ok(())
    } else {
        Err(ExperimentError::InvalidParam(msg.into()))
    }
}

fn value_n(result: &mut ExperimentResult, p: &ExperimentParams, seed: u64, trials: u64) -> Result<(), ExperimentError> {
    let n = p.n.unwrap_or(12);
    let count = p.count.unwrap_or(20);
    need(n >= 1, "n must be at least 1")?;
    result.param("n", n);
    result.param("count", count);
    let outs = (0..count)
        .into_par_iter()
        .map(|case| -> Result<CaseOut, ExperimentError> {
            let mut rng = case_rng(seed, case);
            let g = generate::random_connected(n, 0.25, &mut rng);
            let u = Gamble::uniform(n).map_err(internal)?;
            let nn = int(n as i64);
            let mut out = CaseOut::new();
            let mut row = Row::new(case, format!("random graph n={n} m={}", g.edge_count()));
            row.put("n", n).put("edges", g.edge_count());
            let mut walks: Vec<_> = (0..5).map(|_| generate::random_walk(&g, 2 * n, &mut rng)).collect();
            walks.push(strategies::known_gamble_walk(&g, &u, 0).map_err(internal)?);
            let mut all_n = true;
            for (i, w) in walks.iter().enumerate() {
                let e = capture::expected_capture_time(w, &u).map_err(internal)?;
                all_n &= e == Expectation::Finite(nn.clone());
                row.put(&format!("walk{i}_e"), exp_str(&e));
            }
            out.check(case, "uniform-exact: every walk has E = n against the uniform gamble", format!("= {n}"), if all_n { n.to_string() } else { "mismatch".into() }, all_n);
            let s = solver::value_sandwich(&g, &u, 0, DEFAULT_TOL).map_err(internal)?;
            let ok = (s.lower - n as f64).abs() <= 1e-9 && s.upper == Expectation::Finite(nn);
            row.put("solver_lower", format!("{:.12}", s.lower)).put("solver_upper", exp_str(&s.upper));
            out.check(case, "game-value: optimal value is n", format!("{n} +- 1e-9"), format!("[{:.12}, {}]", s.lower, s.upper), ok);
            out.rows.push(row);
            if case < 3 {
                out.sims.push(SimCase {
                    label: format!("value-n case {case}"),
                    strategy: CopStrategy::Mixture(capture::RandomizedStrategy::pure(walks[0].clone())),
                    opponent: u.into(),
                    exact: n as f64,
                });
            }
            Ok(out)
        })
        .collect();
    collect(result, outs, trials, seed)
}

/// Result of checking the greedy branch strategy on one rooted tree and gamble.
pub struct TreeCheck {
    pub expectation: Expectation,
    pub within_n: bool,
    pub suffixes_ok: bool,
}

/// Exact E of the greedy walk against `g` and every suffix bound
/// `T_i <= m_i / c_i` along its descent path.
pub fn check_tree_strategy(rt: &RootedTree, g: &Gamble) -> TreeCheck {
    let walk = strategies::tree_pursuit_walk(rt, g);
    let e = capture::expected_capture_time(&walk, g).expect("sizes match");
    let table = strategies::branch_table(rt, g);
    let path = strategies::tree_pursuit_path(rt, g);
    let suffixes_ok = (0..path.len()).all(|i| {
        let v = path[i];
        let bound = int(table.size[v] as i64) / &table.mass[v];
        capture::expected_capture_time(&strategies::suffix_walk(rt, &path, i), g).expect("sizes match").le(&bound)
    });
    let within_n = e.le(&int(rt.n() as i64));
    TreeCheck { expectation: e, within_n, suffixes_ok }
}

fn tree_bound(result: &mut ExperimentResult, p: &ExperimentParams, seed: u64) -> Result<(), ExperimentError> {
    let max_n = p.n.unwrap_or(9);
    let gambles = p.gambles.unwrap_or(20);
    need((1..=11).contains(&max_n), "tree-bound enumerates trees exhaustively; n must be in 1..=11")?;
    result.param("max_n", max_n);
    result.param("gambles", gambles);
    let trees: Vec<Graph> = (1..=max_n).flat_map(generate::unlabeled_trees).collect();
    let outs = trees
        .par_iter()
        .enumerate()
        .map(|(case, t)| -> Result<CaseOut, ExperimentError> {
            let mut rng = case_rng(seed, case);
            let n = t.n();
            let mut out = CaseOut::new();
            let mut worst = Rational::zero();
            let (mut ok_e, mut ok_suffix) = (true, true);
            for root in 0..n {
                let rt = RootedTree::new(t.clone(), root).map_err(internal)?;
                for _ in 0..gambles {
                    let g = Gamble::random(n, MAX_WEIGHT, &mut rng);
                    let c = check_tree_strategy(&rt, &g);
                    ok_e &= c.within_n;
                    ok_suffix &= c.suffixes_ok;
                    if let Some(e) = c.expectation.finite() {
                        if *e > worst {
                            worst = e.clone();
                        }
                    }
                }
            }
            let mut row = Row::new(case, format!("tree n={n} edges={:?}", t.edges()));
            row.put("n", n).put("checks", n * gambles).put("max_e", format_rational(&worst));
            out.rows.push(row);
            out.check(case, "tree-bound: greedy branch walk has E <= n", format!("<= {n}"), format_rational(&worst), ok_e);
            out.check(case, "tree-suffix: remaining time from v_i is at most m_i/c_i", "all suffixes", if ok_suffix { "ok" } else { "violated" }, ok_suffix);
            Ok(out)
        })
        .collect();
    collect(result, outs, 0, seed)
}

/// Exact star-sweep constants for one `n`.
pub struct StarTable {
    pub n: usize,
    pub dwell1_sitter: Rational,
    pub dwell1_uniform: Rational,
    pub dwell2_sitter: Rational,
    pub dwell2_uniform: Rational,
    /// Whether the rotation-mixture evaluation agreed with the rank formulas.
    pub routes_agree: bool,
}

pub fn star_table(n: usize) -> Result<StarTable, ExperimentError> {
    let g = generate::star(n);
    let leaves: Vec<usize> = (1..n).collect();
    let sitter = MetaGamble::random_sitter(n, &leaves).map_err(internal)?;
    let unif = MetaGamble::single(Gamble::uniform_on(n, &leaves).map_err(internal)?);
    let mut vals = Vec::new();
    let mut agree = true;
    for dwell in [1, 2] {
        let sweep = StarSweep::new(&g, dwell).map_err(internal)?;
        let by_rank = [sweep.rank_expectation_sitter(), sweep.rank_expectation_uniform_leaves()];
        for (m, rank) in [&sitter, &unif].into_iter().zip(by_rank) {
            let exact = sweep.exact_vs_meta(m).map_err(internal)?;
            agree &= exact == Expectation::Finite(rank.clone());
            vals.push(rank);
        }
    }
    let [a, b, c, d]: [Rational; 4] = vals.try_into().expect("four values");
    Ok(StarTable { n, dwell1_sitter: a, dwell1_uniform: b, dwell2_sitter: c, dwell2_uniform: d, routes_agree: agree })
}

fn star(result: &mut ExperimentResult, p: &ExperimentParams, seed: u64, trials: u64) -> Result<(), ExperimentError> {
    let sizes: Vec<usize> = match p.n {
        Some(n) => vec![n],
        None => vec![3, 5, 10, 20, 51, 101],
    };
    need(sizes.iter().all(|&n| n >= 3), "star needs n >= 3")?;
    result.param("n", sizes.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" "));
    let outs = sizes
        .par_iter()
        .enumerate()
        .map(|(case, &n)| -> Result<CaseOut, ExperimentError> {
            let t = star_table(n)?;
            let mut out = CaseOut::new();
            let nn = int(n as i64);
            let three_half = frac(3 * n as i64, 2);
            let mut row = Row::new(case, format!("star K_1,{}", n - 1));
            row.put("n", n)
                .put("dwell1_sitter", format_rational(&t.dwell1_sitter))
                .put("dwell1_uniform_leaves", format_rational(&t.dwell1_uniform))
                .put("dwell2_sitter", format_rational(&t.dwell2_sitter))
                .put("dwell2_uniform_leaves", format_rational(&t.dwell2_uniform))
                // the rejected two-pass reading repeats the dwell-1 sweep
                .put("double_pass_worst", format_rational(&t.dwell1_sitter.clone().max(t.dwell1_uniform.clone())));
            out.rows.push(row);
            out.check(case, "star-sitter: even-move sweep vs random sitter gives n", format!("= {n}"), format_rational(&t.dwell1_sitter), t.dwell1_sitter == nn);
            let two = int(2 * n as i64 - 2);
            out.check(case, "star-uniform: even-move sweep vs uniform leaves gives 2n-2", format!("= {}", 2 * n - 2), format_rational(&t.dwell1_uniform), t.dwell1_uniform == two);
            for (label, v) in [("sitter", &t.dwell2_sitter), ("uniform leaves", &t.dwell2_uniform)] {
                let ok = num_traits::Signed::abs(&(v - &three_half)) <= int(2);
                out.check(case, &format!("star-dwell2: double-visit sweep vs {label} is about 3n/2"), format!("in [3n/2-2, 3n/2+2] = [{}, {}]", format_rational(&(&three_half - int(2))), format_rational(&(&three_half + int(2)))), format_rational(v), ok);
            }
            out.check(case, "star-rank: rotation mixture matches rank-symmetry formulas", "equal", if t.routes_agree { "equal" } else { "differ" }, t.routes_agree);
            if n <= 20 {
                let g = generate::star(n);
                let leaves: Vec<usize> = (1..n).collect();
                for dwell in [1, 2] {
                    let sweep = CopStrategy::Sweep(StarSweep::new(&g, dwell).map_err(internal)?);
                    let sitter = MetaGamble::random_sitter(n, &leaves).map_err(internal)?;
                    let exact = if dwell == 1 { &t.dwell1_sitter } else { &t.dwell2_sitter };
                    out.sims.push(SimCase { label: format!("star n={n} dwell {dwell} vs sitter"), strategy: sweep.clone(), opponent: sitter.into(), exact: crate::rational::to_f64(exact) });
                    let unif = Gamble::uniform_on(n, &leaves).map_err(internal)?;
                    let exact = if dwell == 1 { &t.dwell1_uniform } else { &t.dwell2_uniform };
                    out.sims.push(SimCase { label: format!("star n={n} dwell {dwell} vs uniform leaves"), strategy: sweep, opponent: unif.into(), exact: crate::rational::to_f64(exact) });
                }
            }
            Ok(out)
        })
        .collect();
    collect(result, outs, trials, seed)
}

fn cycle(result: &mut ExperimentResult, p: &ExperimentParams, seed: u64, trials: u64) -> Result<(), ExperimentError> {
    let n = p.n.unwrap_or(30);
    let count = p.count.unwrap_or(100);
    need(n >= 3, "cycle needs n >= 3")?;
    result.param("n", n);
    result.param("count", count);
    let g = generate::cycle(n);
    let circle = strategies::cycle_circling_strategy(&g, 0).map_err(internal)?;
    let bound = strategies::cycle_circling_bound(n);
    let survival_cap = strategies::uniform_miss_power(n, n);
    let outs = (0..=count)
        .into_par_iter()
        .map(|case| -> Result<CaseOut, ExperimentError> {
            let mut out = CaseOut::new();
            // the last case is the interval meta-gamble
            if case == count {
                let k = MetaGamble::default_interval_width(n);
                let m = MetaGamble::interval(n, k).map_err(internal)?;
                let e = capture::expected_capture_meta(&circle, &m).map_err(internal)?;
                let mut row = Row::new(case, format!("interval meta-gamble k={k}"));
                row.put("e", exp_str(&e)).put("e_float", format!("{:.6}", e.to_f64())).put("round_survival", "-");
                out.rows.push(row);
                out.check(case, "cycle-circling: E <= (e/(e-1) - 1/2) n + 1", format!("<= {bound:.6}"), format!("{:.6}", e.to_f64()), e.to_f64() <= bound);
                return Ok(out);
            }
            let mut rng = case_rng(seed, case);
            let gm = Gamble::random(n, MAX_WEIGHT, &mut rng);
            let e = capture::expected_capture_randomized(&circle, &gm).map_err(internal)?;
            let rho = strategies::round_survival(&circle.components()[0].1, &gm).expect("loop walk");
            let mut row = Row::new(case, "random gamble");
            row.put("e", exp_str(&e)).put("e_float", format!("{:.6}", e.to_f64())).put("round_survival", format!("{:.6e}", crate::rational::to_f64(&rho)));
            out.rows.push(row);
            out.check(case, "cycle-circuit: survival per circuit <= (1-1/n)^n", format!("<= {:.6e}", crate::rational::to_f64(&survival_cap)), format!("{:.6e}", crate::rational::to_f64(&rho)), rho <= survival_cap);
            out.check(case, "cycle-circling: E <= (e/(e-1) - 1/2) n + 1", format!("<= {bound:.6}"), format!("{:.6}", e.to_f64()), e.to_f64() <= bound);
            if case < 4 {
                out.sims.push(SimCase { label: format!("cycle n={n} gamble {case}"), strategy: CopStrategy::Mixture(circle.clone()), opponent: gm.into(), exact: e.to_f64() });
            }
            Ok(out)
        })
        .collect();
    collect(result, outs, trials, seed)
}

/// Exact checks of the depth-first patrol on one rooted tree and gamble.
pub struct PatrolCheck {
    pub round_length: usize,
    pub round_survival: Rational,
    /// `prod (1 - p_i)^2`
    pub squared_miss: Rational,
    pub expectation: Expectation,
}

pub fn check_patrol(rt: &RootedTree, g: &Gamble) -> PatrolCheck {
    let s = strategies::dfs_patrol_strategy(rt);
    let round_length = s.components().iter().map(|(_, w)| match w.tail() {
        Tail::Loop(c) => c.len(),
        Tail::Absorb(_) => 0,
    }).max().unwrap_or(0);
    let round_survival = s
        .components()
        .iter()
        .map(|(_, w)| strategies::round_survival(w, g).expect("patrol loops"))
        .max()
        .expect("two directions");
    let squared_miss: Rational = g.probs().iter().map(|p| {
        let m = Rational::one() - p;
        &m * &m
    }).product();
    let expectation = capture::expected_capture_randomized(&s, g).expect("sizes match");
    PatrolCheck { round_length, round_survival, squared_miss, expectation }
}

fn dfs_patrol(result: &mut ExperimentResult, p: &ExperimentParams, seed: u64, trials: u64) -> Result<(), ExperimentError> {
    let max_n = p.n.unwrap_or(40);
    let count = p.count.unwrap_or(50);
    need(max_n >= 2, "dfs-patrol needs n >= 2")?;
    result.param("max_n", max_n);
    result.param("count", count);
    let outs = (0..count)
        .into_par_iter()
        .map(|case| -> Result<CaseOut, ExperimentError> {
            use rand::Rng;
            let mut rng = case_rng(seed, case);
            let n = rng.gen_range(2..=max_n);
            let t = generate::random_tree(n, &mut rng);
            let root = rng.gen_range(0..n);
            let rt = RootedTree::new(t.clone(), root).map_err(internal)?;
            let leaves = t.leaves();
            let gambles = [
                ("random", Gamble::random(n, MAX_WEIGHT, &mut rng)),
                ("uniform", Gamble::uniform(n).map_err(internal)?),
                ("uniform-leaves", Gamble::uniform_on(n, &leaves).map_err(internal)?),
            ];
            let mut out = CaseOut::new();
            let nn = int(n as i64);
            let cap = strategies::uniform_miss_power(n, 2 * n);
            for (kind, g) in gambles {
                let c = check_patrol(&rt, &g);
                let mut row = Row::new(case, format!("tree n={n} root={root} gamble={kind}"));
                row.put("n", n)
                    .put("round_length", c.round_length)
                    .put("round_survival", format!("{:.6e}", crate::rational::to_f64(&c.round_survival)))
                    .put("e", exp_str(&c.expectation))
                    .put("e_over_n", format!("{:.6}", c.expectation.to_f64() / n as f64));
                out.rows.push(row);
                out.check(case, "patrol-round: one search takes at most 3n-2 moves", format!("<= {}", 3 * n - 2), c.round_length, c.round_length <= 3 * n - 2);
                let ok = c.round_survival <= c.squared_miss && c.squared_miss <= cap;
                out.check(case, "patrol-survival: per-round survival <= prod (1-p_i)^2 <= (1-1/n)^(2n)", format!("<= {:.6e}", crate::rational::to_f64(&c.squared_miss)), format!("{:.6e}", crate::rational::to_f64(&c.round_survival)), ok);
                out.check(case, "patrol-time: E < 2n", format!("< {}", 2 * n), format!("{:.6}", c.expectation.to_f64()), c.expectation.lt(&(int(2) * &nn)));
                if case < 2 {
                    out.sims.push(SimCase {
                        label: format!("dfs-patrol case {case} {kind}"),
                        strategy: CopStrategy::Mixture(strategies::dfs_patrol_strategy(&rt)),
                        opponent: g.into(),
                        exact: c.expectation.to_f64(),
                    });
                }
            }
            Ok(out)
        })
        .collect();
    collect(result, outs, trials, seed)
}

fn conjecture_probe(result: &mut ExperimentResult, p: &ExperimentParams) -> Result<(), ExperimentError> {
    let max_n = p.n.unwrap_or(16);
    need(max_n >= 4, "conjecture-probe needs n >= 4")?;
    result.param("max_n", max_n);
    let mut instances: Vec<(String, Graph)> = Vec::new();
    for n in (4..=max_n).step_by(4) {
        instances.push((format!("path n={n}"), generate::path(n)));
        instances.push((format!("star n={n}"), generate::star(n)));
        instances.push((format!("cycle n={n}"), generate::cycle(n)));
        let mut rng = case_rng(p.seed.unwrap_or(DEFAULT_SEED), n);
        instances.push((format!("random tree n={n}"), generate::random_tree(n, &mut rng)));
    }
    let outs = instances
        .par_iter()
        .enumerate()
        .map(|(case, (label, g))| -> Result<CaseOut, ExperimentError> {
            let n = g.n();
            let leaves = g.leaves();
            let sites = if leaves.is_empty() { (0..n).collect() } else { leaves.clone() };
            let mut metas = vec![
                ("uniform", MetaGamble::single(Gamble::uniform(n).map_err(internal)?)),
                ("random-sitter", MetaGamble::random_sitter(n, &sites).map_err(internal)?),
                ("uniform-sites", MetaGamble::single(Gamble::uniform_on(n, &sites).map_err(internal)?)),
            ];
            let mut cops: Vec<(String, CopStrategy)> = Vec::new();
            for root in 0..n {
                cops.push((format!("dfs-patrol@{root}"), CopStrategy::build(strategies::StrategyName::DfsPatrol, g, root, None).map_err(internal)?));
            }
            if g.star_center().is_some() {
                for d in [1, 2] {
                    cops.push((format!("star-sweep:{d}"), CopStrategy::Sweep(StarSweep::new(g, d).map_err(internal)?)));
                }
            }
            if g.cycle_order(0).is_some() {
                let k = MetaGamble::default_interval_width(n);
                metas.push(("interval", MetaGamble::interval(n, k).map_err(internal)?));
                cops.push(("cycle-circle".into(), CopStrategy::Mixture(strategies::cycle_circling_strategy(g, 0).map_err(internal)?)));
            }
            let mut worst_meta = ("", f64::NEG_INFINITY, String::new());
            for (mname, m) in &metas {
                let best = cops
                    .iter()
                    .filter_map(|(cname, c)| c.exact_vs_meta(m).ok().map(|e| (e.to_f64(), cname.clone())))
                    .fold((f64::INFINITY, String::new()), |a, b| if b.0 < a.0 { b } else { a });
                if best.0 > worst_meta.1 {
                    worst_meta = (mname, best.0, best.1);
                }
            }
            let mut out = CaseOut::new();
            let mut row = Row::new(case, label.clone());
            row.put("n", n)
                .put("hardest_meta", worst_meta.0)
                .put("best_cop", &worst_meta.2)
                .put("value", format!("{:.6}", worst_meta.1))
                .put("value_over_n", format!("{:.6}", worst_meta.1 / n as f64));
            out.rows.push(row);
            Ok(out)
        })
        .collect();
    collect(result, outs, 0, 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl FromStr for Format {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" | "table" => Ok(Format::Text),
            _ => Err(ExperimentError::UnknownFormat(s.into())),
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Renders a result. CSV has one line per row (header from the first row's
/// field names); the text form adds the bound checks.
pub fn emit(result: &ExperimentResult, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(result).expect("serializable") + "\n",
        Format::Csv => {
            let keys: Vec<&str> = result.rows.first().map(|r| r.fields.iter().map(|(k, _)| k.as_str()).collect()).unwrap_or_default();
            let mut out = String::from("case,label");
            for k in &keys {
                out.push(',');
                out.push_str(&csv_field(k));
            }
            out.push('\n');
            for r in &result.rows {
                let _ = write!(out, "{},{}", r.case, csv_field(&r.label));
                for (_, v) in &r.fields {
                    out.push(',');
                    out.push_str(&csv_field(v));
                }
                out.push('\n');
            }
            out
        }
        Format::Text => {
            let mut out = format!("experiment {}\n", result.experiment);
            for (k, v) in &result.parameters {
                let _ = writeln!(out, "  {k} = {v}");
            }
            for r in &result.rows {
                let fields: Vec<String> = r.fields.iter().map(|(k, v)| format!("{k}={v}")).collect();
                let _ = writeln!(out, "[{:>3}] {:<40} {}", r.case, r.label, fields.join("  "));
            }
            let passed = result.bounds.iter().filter(|b| b.pass).count();
            let _ = writeln!(out, "bounds: {passed}/{} pass", result.bounds.len());
            for b in result.failures() {
                let _ = writeln!(out, "  FAIL case {}: {} (claimed {}, got {})", b.case, b.anchor, b.claimed, b.value);
            }
            if let Some(sims) = &result.simulation {
                for c in sims {
                    let _ = writeln!(
                        out,
                        "  sim {:<40} exact {:.6} mean {:.6} z {:.2}{}",
                        c.label,
                        c.exact,
                        c.mean,
                        c.z,
                        if c.flagged { "  FLAGGED" } else { "" }
                    );
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for e in ExperimentName::ALL {
            assert_eq!(e.as_str().parse::<ExperimentName>().unwrap(), e);
        }
        assert!(matches!("nope".parse::<ExperimentName>(), Err(ExperimentError::Unknown(_))));
        assert!(matches!("xml".parse::<Format>(), Err(ExperimentError::UnknownFormat(_))));
    }

    #[test]
    fn star_n5_table() {
        let r = run_experiment(ExperimentName::Star, &ExperimentParams { n: Some(5), ..Default::default() }).unwrap();
        assert!(r.all_pass());
        let row = &r.rows[0];
        let get = |k: &str| row.fields.iter().find(|(f, _)| f == k).unwrap().1.clone();
        assert_eq!(get("dwell1_sitter"), "5/1");
        assert_eq!(get("dwell1_uniform_leaves"), "8/1");
        let json = emit(&r, Format::Json);
        assert!(json.contains("\"dwell1_uniform_leaves\": \"8/1\""));
    }

    #[test]
    fn value_n_small() {
        let params = ExperimentParams { n: Some(12), count: Some(4), ..Default::default() };
        let r = run_experiment(ExperimentName::ValueN, &params).unwrap();
        assert!(r.all_pass(), "{:?}", r.failures());
        let csv = emit(&r, Format::Csv);
        assert_eq!(csv.lines().count(), 1 + 4);
        assert!(csv.starts_with("case,label,n,edges,walk0_e"));
        assert!(csv.lines().nth(1).unwrap().contains(",12/1,"));
    }

    #[test]
    fn empty_result_is_header_only_csv() {
        let r = ExperimentResult::new(ExperimentName::ValueN);
        assert_eq!(emit(&r, Format::Csv), "case,label\n");
        assert!(r.all_pass());
    }

    #[test]
    fn deterministic_given_seed() {
        let params = ExperimentParams { n: Some(12), count: Some(5), seed: Some(99), ..Default::default() };
        let a = emit(&run_experiment(ExperimentName::DfsPatrol, &params).unwrap(), Format::Json);
        let b = emit(&run_experiment(ExperimentName::DfsPatrol, &params).unwrap(), Format::Json);
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_params() {
        let p = ExperimentParams { n: Some(2), ..Default::default() };
        assert!(matches!(run_experiment(ExperimentName::Cycle, &p), Err(ExperimentError::InvalidParam(_))));
        assert!(matches!(run_experiment(ExperimentName::Star, &p), Err(ExperimentError::InvalidParam(_))));
    }

    #[test]
    fn conjecture_probe_reports_only() {
        let r = run_experiment(ExperimentName::ConjectureProbe, &ExperimentParams { n: Some(8), ..Default::default() }).unwrap();
        assert!(r.bounds.is_empty());
        assert_eq!(r.rows.len(), 8);
    }
}
