//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Tolerances and corpus sizes are fixed here.

use std::time::{Duration, Instant};

use gambler::capture::{self, Expectation, RandomizedStrategy, Tail, Walk};
use gambler::gamble::{Gamble, MetaGamble};
use gambler::generate;
use gambler::graph::{Graph, RootedTree};
use gambler::rational::{frac, int, to_f64, Rational};
use gambler::sim::{self, Opponent, SimConfig};
use gambler::solver::{self, DEFAULT_TOL};
use gambler::strategies::{self, CopStrategy, StarSweep};
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const MAX_WEIGHT: u64 = 100;

type Criterion<'a> = (&'static str, Duration, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn ok(detail: impl Into<String>) -> Outcome {
    Outcome { pass: true, detail: detail.into() }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome { pass: false, detail: detail.into() }
}

/// Criterion 1: uniform gamble gives E = n exactly for every walk.
fn uniform_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..200 {
        let n = rng.gen_range(2..=50);
        let g = generate::random_connected(n, rng.gen_range(0.0..0.3), &mut rng);
        let w = generate::random_walk(&g, 2 * n, &mut rng);
        let e = capture::expected_capture_time(&w, &Gamble::uniform(n).unwrap()).unwrap();
        if e != Expectation::Finite(int(n as i64)) {
            return fail(format!("case {i}: n={n} walk {w} gave {e}"));
        }
    }
    ok("200 random (graph, walk) pairs, E = n exactly")
}

/// Criterion 2: exhaustive trees n <= 9, every root, 100 gambles each.
fn tree_bound() -> Outcome {
    let trees: Vec<Graph> = (1..=9).flat_map(generate::unlabeled_trees).collect();
    let checked: Result<usize, String> = trees
        .par_iter()
        .enumerate()
        .map(|(ti, t)| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + ti as u64);
            let n = t.n();
            let mut count = 0;
            for root in 0..n {
                let rt = RootedTree::new(t.clone(), root).unwrap();
                for _ in 0..100 {
                    let g = Gamble::random(n, MAX_WEIGHT, &mut rng);
                    let walk = strategies::tree_pursuit_walk(&rt, &g);
                    let e = capture::expected_capture_time(&walk, &g).unwrap();
                    if !e.le(&int(n as i64)) {
                        return Err(format!("tree {:?} root {root}: E = {e} > {n}", t.edges()));
                    }
                    let table = strategies::branch_table(&rt, &g);
                    let path = strategies::tree_pursuit_path(&rt, &g);
                    for i in 0..path.len() {
                        let v = path[i];
                        let bound = int(table.size[v] as i64) / &table.mass[v];
                        let ti = capture::expected_capture_time(&strategies::suffix_walk(&rt, &path, i), &g).unwrap();
                        if !ti.le(&bound) {
                            return Err(format!("tree {:?} root {root}: suffix at {v} has T = {ti} > m/c = {bound}", t.edges()));
                        }
                    }
                    count += 1;
                }
            }
            Ok(count)
        })
        .sum();
    match checked {
        Ok(c) => ok(format!("{} trees, {c} (root, gamble) pairs, E <= n and all suffixes T_i <= m_i/c_i", trees.len())),
        Err(e) => fail(e),
    }
}

/// Shared corpus for criteria 3 and 7: 50 random connected graphs n <= 12
/// with random gambles.
fn solver_corpus() -> Vec<(Graph, Gamble)> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    (0..50)
        .map(|_| {
            let n = rng.gen_range(2..=12);
            let g = generate::random_connected(n, rng.gen_range(0.0..0.5), &mut rng);
            let gm = Gamble::random(n, MAX_WEIGHT, &mut rng);
            (g, gm)
        })
        .collect()
}

/// Criterion 3: sandwich upper <= n; uniform sandwich within 1e-9 of n.
fn game_value(corpus: &[(Graph, Gamble)]) -> Outcome {
    for (i, (g, gm)) in corpus.iter().enumerate() {
        let n = g.n();
        let nn = int(n as i64);
        let u = Gamble::uniform(n).unwrap();
        for start in 0..n {
            let s = match solver::value_sandwich(g, gm, start, DEFAULT_TOL) {
                Ok(s) => s,
                Err(e) => return fail(format!("case {i} start {start}: {e}")),
            };
            if !s.upper.le(&nn) {
                return fail(format!("case {i} start {start}: upper {} > n = {n}", s.upper));
            }
            let su = match solver::value_sandwich(g, &u, start, DEFAULT_TOL) {
                Ok(s) => s,
                Err(e) => return fail(format!("case {i} start {start} uniform: {e}")),
            };
            let up = su.upper.to_f64();
            if (su.lower - n as f64).abs() > 1e-9 || (up - n as f64).abs() > 1e-9 {
                return fail(format!("case {i} start {start}: uniform sandwich [{}, {up}] not within 1e-9 of {n}", su.lower));
            }
        }
    }
    ok("50 graphs, every start: upper <= n exactly; uniform sandwich within 1e-9 of n")
}

/// Criterion 4: star constants.
fn star_constants() -> Outcome {
    for n in 3..=50usize {
        let g = generate::star(n);
        let leaves: Vec<usize> = (1..n).collect();
        let sitter = MetaGamble::random_sitter(n, &leaves).unwrap();
        let unif = MetaGamble::single(Gamble::uniform_on(n, &leaves).unwrap());
        let sweep = StarSweep::new(&g, 1).unwrap();
        let es = sweep.exact_vs_meta(&sitter).unwrap();
        let eu = sweep.exact_vs_meta(&unif).unwrap();
        if es != Expectation::Finite(int(n as i64)) || eu != Expectation::Finite(int(2 * n as i64 - 2)) {
            return fail(format!("n={n}: dwell-1 gave sitter {es}, uniform leaves {eu}"));
        }
    }
    let mut detail = Vec::new();
    for n in [51usize, 101] {
        let g = generate::star(n);
        let leaves: Vec<usize> = (1..n).collect();
        let sweep = StarSweep::new(&g, 2).unwrap();
        let three_half = frac(3 * n as i64, 2);
        let sitter = MetaGamble::random_sitter(n, &leaves).unwrap();
        let unif = MetaGamble::single(Gamble::uniform_on(n, &leaves).unwrap());
        // rank-symmetry oracle: capture rank of the sitter's leaf is uniform,
        // uniform-leaf trials are independent across leaf visits
        let l = (n - 1) as i64;
        let oracle_sitter = frac((1..=l).map(|r| 3 * (r - 1) + 2).sum::<i64>(), l);
        let q = frac(1, l);
        let oracle_unif = (int(3) - &q) / (&q * (int(2) - &q));
        for (label, m, oracle) in [("sitter", &sitter, oracle_sitter), ("uniform leaves", &unif, oracle_unif)] {
            let e = sweep.exact_vs_meta(m).unwrap();
            let v = e.finite().unwrap().clone();
            if v != oracle {
                return fail(format!("n={n} dwell-2 vs {label}: evaluator {v} != rank oracle {oracle}"));
            }
            if (&v - &three_half).abs() > int(2) {
                return fail(format!("n={n} dwell-2 vs {label}: {} outside 3n/2 +- 2", to_f64(&v)));
            }
            detail.push(format!("n={n} {label} {:.3}", to_f64(&v)));
        }
    }
    ok(format!("dwell-1 = n and 2n-2 for 3 <= n <= 50; dwell-2: {}", detail.join(", ")))
}

/// Criterion 5: circling on C_30.
fn cycle_circling() -> Outcome {
    let n = 30;
    let g = generate::cycle(n);
    let s = strategies::cycle_circling_strategy(&g, 0).unwrap();
    let cap = strategies::uniform_miss_power(n, n);
    let bound = strategies::cycle_circling_bound(n);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let gm = Gamble::random(n, MAX_WEIGHT, &mut rng);
        for (_, w) in s.components() {
            let rho = strategies::round_survival(w, &gm).unwrap();
            if rho > cap {
                return fail(format!("gamble {i}: circuit survival {} > (1-1/n)^n", to_f64(&rho)));
            }
        }
        let e = capture::expected_capture_randomized(&s, &gm).unwrap().to_f64();
        if e > bound {
            return fail(format!("gamble {i}: E = {e} > {bound}"));
        }
        worst = worst.max(e);
    }
    ok(format!("100 gambles on C_30: survival <= (29/30)^30, max E = {worst:.4} <= {bound:.4}"))
}

/// Criterion 6: depth-first patrol.
fn dfs_patrol() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_ratio = 0.0f64;
    for i in 0..50 {
        let n = rng.gen_range(2..=40);
        let t = generate::random_tree(n, &mut rng);
        let root = rng.gen_range(0..n);
        let rt = RootedTree::new(t.clone(), root).unwrap();
        let s = strategies::dfs_patrol_strategy(&rt);
        let cap = strategies::uniform_miss_power(n, 2 * n);
        let gambles = [
            Gamble::random(n, MAX_WEIGHT, &mut rng),
            Gamble::uniform(n).unwrap(),
            Gamble::uniform_on(n, &t.leaves()).unwrap(),
        ];
        for gm in &gambles {
            let squared: Rational = gm.probs().iter().map(|p| (Rational::one() - p) * (Rational::one() - p)).product();
            if squared > cap {
                return fail(format!("case {i}: prod (1-p)^2 exceeds (1-1/n)^(2n)"));
            }
            for (_, w) in s.components() {
                let Tail::Loop(c) = w.tail() else { return fail("patrol walk must loop") };
                if c.len() > 3 * n - 2 {
                    return fail(format!("case {i}: round length {} > 3n-2 = {}", c.len(), 3 * n - 2));
                }
                if strategies::round_survival(w, gm).unwrap() > squared {
                    return fail(format!("case {i}: round survival exceeds prod (1-p)^2"));
                }
            }
            let e = capture::expected_capture_randomized(&s, gm).unwrap();
            if !e.lt(&int(2 * n as i64)) {
                return fail(format!("case {i}: E = {e} >= 2n = {}", 2 * n));
            }
            worst_ratio = worst_ratio.max(e.to_f64() / n as f64);
        }
    }
    ok(format!("50 trees x 3 gambles: round <= 3n-2, survival bounds hold, max E/n = {worst_ratio:.4} < 2"))
}

/// Criterion 7: the solver value is at most the tree-strategy expectation.
fn solver_dominance(corpus: &[(Graph, Gamble)]) -> Outcome {
    for (i, (g, gm)) in corpus.iter().enumerate() {
        let vt = solver::solve_value(g, gm, DEFAULT_TOL).unwrap();
        for start in 0..g.n() {
            let w = strategies::known_gamble_walk(g, gm, start).unwrap();
            let e = capture::expected_capture_time(&w, gm).unwrap().to_f64();
            if vt.values[start] > e + 1e-9 {
                return fail(format!("case {i} start {start}: solver {} > tree strategy {e}", vt.values[start]));
            }
        }
    }
    ok("50 graphs, every start: solver value <= tree-strategy E + 1e-9")
}

struct McCase {
    label: String,
    strategy: CopStrategy,
    opponent: Opponent,
    exact: Rational,
}

fn mc_corpus() -> Vec<McCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut cases = Vec::new();
    let pure = |w: Walk| CopStrategy::Mixture(RandomizedStrategy::pure(w));
    let exact_of = |s: &CopStrategy, o: &Opponent| -> Rational {
        let m = match o {
            Opponent::Gamble(g) => MetaGamble::single(g.clone()),
            Opponent::Meta(m) => m.clone(),
        };
        s.exact_vs_meta(&m).unwrap().finite().unwrap().clone()
    };
    let mut push = |label: String, strategy: CopStrategy, opponent: Opponent| {
        let exact = exact_of(&strategy, &opponent);
        cases.push(McCase { label, strategy, opponent, exact });
    };

    let p2 = generate::path(2);
    push("stay p=1/2".into(), pure(Walk::stay(&p2, 0).unwrap()), Gamble::uniform(2).unwrap().into());
    for i in 0..3 {
        let g = generate::random_connected(10, 0.2, &mut rng);
        let w = generate::random_walk(&g, 20, &mut rng);
        push(format!("uniform n=10 walk {i}"), pure(w), Gamble::uniform(10).unwrap().into());
    }
    for n in [5usize, 10] {
        let g = generate::star(n);
        let leaves: Vec<usize> = (1..n).collect();
        for dwell in [1, 2] {
            let s = CopStrategy::Sweep(StarSweep::new(&g, dwell).unwrap());
            push(format!("star n={n} dwell {dwell} vs sitter"), s.clone(), MetaGamble::random_sitter(n, &leaves).unwrap().into());
            push(format!("star n={n} dwell {dwell} vs uniform leaves"), s, Gamble::uniform_on(n, &leaves).unwrap().into());
        }
    }
    let c10 = generate::cycle(10);
    for i in 0..2 {
        let s = CopStrategy::Mixture(strategies::cycle_circling_strategy(&c10, 0).unwrap());
        push(format!("circling C_10 gamble {i}"), s, Gamble::random(10, MAX_WEIGHT, &mut rng).into());
    }
    let c9 = generate::cycle(9);
    push(
        "circling C_9 vs interval k=3".into(),
        CopStrategy::Mixture(strategies::cycle_circling_strategy(&c9, 0).unwrap()),
        MetaGamble::interval(9, 3).unwrap().into(),
    );
    for i in 0..2 {
        let n = rng.gen_range(4..=12);
        let t = generate::random_tree(n, &mut rng);
        let rt = RootedTree::new(t, 0).unwrap();
        push(format!("dfs patrol n={n} case {i}"), CopStrategy::Mixture(strategies::dfs_patrol_strategy(&rt)), Gamble::random(n, MAX_WEIGHT, &mut rng).into());
    }
    for i in 0..3 {
        let n = rng.gen_range(4..=10);
        let g = generate::random_connected(n, 0.3, &mut rng);
        let gm = Gamble::random(n, MAX_WEIGHT, &mut rng);
        let w = strategies::known_gamble_walk(&g, &gm, 0).unwrap();
        push(format!("spanning-tree walk n={n} case {i}"), pure(w), gm.into());
    }
    cases
}

/// Criterion 8: Monte Carlo agreement and thread-count independence.
fn monte_carlo() -> Outcome {
    let cases = mc_corpus();
    if cases.len() != 20 {
        return fail(format!("corpus has {} cases, expected 20", cases.len()));
    }
    let reports: Vec<_> = cases
        .iter()
        .enumerate()
        .map(|(i, c)| sim::simulate(&c.strategy, &c.opponent, SimConfig::new(100_000, 800 + i as u64)).unwrap())
        .collect();
    let cmp = sim::compare_exact_vs_mc(cases.iter().zip(&reports).map(|(c, r)| (c.label.as_str(), to_f64(&c.exact), r)));
    let flagged: Vec<String> = cmp.iter().filter(|c| c.flagged).map(|c| format!("{} (z = {:.2})", c.label, c.z)).collect();
    if !flagged.is_empty() {
        return fail(format!("outside 4 sigma: {}", flagged.join("; ")));
    }
    let max_z = cmp.iter().map(|c| c.z).fold(0.0, f64::max);
    for c in cases.iter().take(6) {
        let one = sim::simulate(&c.strategy, &c.opponent, SimConfig::new(20_000, 77).with_threads(1)).unwrap();
        let many = sim::simulate(&c.strategy, &c.opponent, SimConfig::new(20_000, 77).with_threads(8)).unwrap();
        if one != many {
            return fail(format!("{}: 1-thread and 8-thread reports differ", c.label));
        }
    }
    ok(format!("20 cases x 1e5 trials within 4 sigma (max z = {max_z:.2}); 1- and 8-thread reports identical"))
}

fn main() {
    let corpus = solver_corpus();
    let criteria: Vec<Criterion> = vec![
        ("1 uniform-gamble exactness", Duration::from_secs(10), Box::new(uniform_exactness)),
        ("2 tree strategy bound", Duration::from_secs(120), Box::new(tree_bound)),
        ("3 game value sandwich", Duration::from_secs(60), Box::new(|| game_value(&corpus))),
        ("4 star constants", Duration::from_secs(30), Box::new(star_constants)),
        ("5 cycle circling", Duration::from_secs(10), Box::new(cycle_circling)),
        ("6 dfs patrol", Duration::from_secs(30), Box::new(dfs_patrol)),
        ("7 solver dominance", Duration::from_secs(60), Box::new(|| solver_dominance(&corpus))),
        ("8 monte carlo agreement", Duration::from_secs(120), Box::new(monte_carlo)),
    ];
    let mut failures = 0;
    for (name, limit, run) in &criteria {
        let t0 = Instant::now();
        let mut out = run();
        let took = t0.elapsed();
        if out.pass && took > *limit {
            out = fail(format!("{} (took {:.1}s, limit {}s)", out.detail, took.as_secs_f64(), limit.as_secs()));
        }
        println!(
            "[{}] criterion {name}: {} ({:.2}s)",
            if out.pass { "PASS" } else { "FAIL" },
            out.detail,
            took.as_secs_f64()
        );
        failures += usize::from(!out.pass);
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
